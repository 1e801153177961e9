//! Special functions and reproducible random streams.
//!
//! The incomplete beta and gamma functions are evaluated in log space with
//! Stirling-corrected prefactors so that the very imbalanced shapes produced
//! by the spacings method (`a = 2^k`, `b ≈ n`) keep full absolute accuracy.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ModeError, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const CF_MAX_ITER: usize = 50_000;
const CF_EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(ModeError::Domain(format!(
                "probability {value} outside [0, 1]"
            )))
        }
    }

    /// A level strictly inside `(0, 1)`, as required for `alpha`.
    pub fn level(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(ModeError::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {value}"
            )))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Probability {
    type Error = ModeError;
    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

impl std::fmt::Display for Probability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

// ---------------------------------------------------------------------------
// Gamma family
// ---------------------------------------------------------------------------

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    if x >= 10.0 {
        return (x - 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_correction(x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    LN_SQRT_2PI + (x + 0.5) * t.ln() - t + acc.ln()
}

/// `ln Γ(x) − [(x − ½) ln x − x + ½ ln 2π]`, valid for `x ≥ 10`.
fn stirling_correction(x: f64) -> f64 {
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let r = 1.0 / x;
    let r2 = r * r;
    let mut acc = 0.0;
    for c in C.iter().rev() {
        acc = acc * r2 + c;
    }
    acc * r
}

/// `ln B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if lo >= 10.0 {
        let s = lo + hi;
        (lo - 0.5) * (lo / s).ln() + (hi - 0.5) * (hi / s).ln() - 0.5 * s.ln()
            + LN_SQRT_2PI
            + stirling_correction(lo)
            + stirling_correction(hi)
            - stirling_correction(s)
    } else if hi >= 10.0 {
        // ln Γ(hi) − ln Γ(lo + hi) without cancelling two huge terms
        let diff =
            -lo * hi.ln() - (lo + hi - 0.5) * (lo / hi).ln_1p() + lo + stirling_correction(hi)
                - stirling_correction(lo + hi);
        ln_gamma(lo) + diff
    } else {
        ln_gamma(lo) + ln_gamma(hi) - ln_gamma(lo + hi)
    }
}

/// `ln[x^a (1−x)^b / B(a, b)]`.
fn ln_beta_prefactor(a: f64, b: f64, x: f64) -> f64 {
    let y = 1.0 - x;
    if a >= 10.0 && b >= 10.0 {
        let s = a + b;
        // d = x·s − a; a·ln(xs/a) + b·ln(ys/b) with the linear parts cancelling
        let d = x * b - y * a;
        let t = d / a;
        let u = -d / b;
        a * (t.ln_1p() - t) + b * (u.ln_1p() - u) + 0.5 * (a * b / s).ln()
            - LN_SQRT_2PI
            - (stirling_correction(a) + stirling_correction(b) - stirling_correction(s))
    } else {
        a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b)
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(ModeError::Domain(format!(
            "beta shapes must be positive, got ({a}, {b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(ModeError::Domain(format!("x = {x} outside [0, 1]")));
    }
    Ok(reg_inc_beta_unchecked(x, a, b))
}

fn reg_inc_beta_unchecked(x: f64, a: f64, b: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        1.0 - beta_cf_term(b, a, 1.0 - x)
    } else {
        beta_cf_term(a, b, x)
    }
}

/// `x^a (1−x)^b / (a B(a,b)) · cf(a, b, x)`, modified Lentz.
fn beta_cf_term(a: f64, b: f64, x: f64) -> f64 {
    let ln_front = ln_beta_prefactor(a, b, x) - a.ln();
    if ln_front < -745.0 {
        return 0.0;
    }
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            break;
        }
    }
    ln_front.exp() * h
}

/// Beta density, used for Newton steps.
fn beta_pdf(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    (ln_beta_prefactor(a, b, x) - x.ln() - (-x).ln_1p()).exp()
}

/// Quantile of the Beta(a, b) distribution.
///
/// `qbeta(0, ..) = 0` and `qbeta(1, ..) = 1`.
pub fn qbeta(p: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(ModeError::Domain(format!(
            "beta shapes must be positive, got ({a}, {b})"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(ModeError::Domain(format!("p = {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let mean = a / (a + b);
    Ok(invert_monotone(
        p,
        0.0,
        1.0,
        mean,
        |x| reg_inc_beta_unchecked(x, a, b),
        |x| beta_pdf(x, a, b),
    ))
}

/// Inverts an increasing CDF on `[lo, hi]` by Newton steps safeguarded with
/// bisection.
pub(crate) fn invert_monotone(
    target: f64,
    mut lo: f64,
    mut hi: f64,
    start: f64,
    cdf: impl Fn(f64) -> f64,
    pdf: impl Fn(f64) -> f64,
) -> f64 {
    let mut x = start.clamp(lo, hi);
    for _ in 0..400 {
        let f = cdf(x) - target;
        if f == 0.0 {
            return x;
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let dens = pdf(x);
        let newton = if dens > 0.0 && dens.is_finite() {
            x - f / dens
        } else {
            f64::NAN
        };
        x = if newton > lo && newton < hi {
            newton
        } else if lo > 0.0 && hi / lo > 1e3 {
            // geometric bisection reaches deep tails quickly
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
    }
    x
}

/// `ln[x^a e^{−x} / Γ(a)]`.
fn ln_gamma_prefactor(a: f64, x: f64) -> f64 {
    if a >= 10.0 {
        let t = (x - a) / a;
        a * (t.ln_1p() - t) + 0.5 * a.ln() - LN_SQRT_2PI - stirling_correction(a)
    } else {
        a * x.ln() - x - ln_gamma(a)
    }
}

/// Regularized lower incomplete gamma function `P(a, x)`.
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(ModeError::Domain(format!(
            "gamma shape must be positive, got {a}"
        )));
    }
    if x.is_nan() || x < 0.0 {
        return Err(ModeError::Domain(format!("x = {x} must be nonnegative")));
    }
    Ok(reg_lower_gamma_unchecked(a, x))
}

fn reg_lower_gamma_unchecked(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let ln_front = ln_gamma_prefactor(a, x);
    if x < a + 1.0 {
        // series
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..CF_MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * CF_EPS {
                break;
            }
        }
        (ln_front.exp() * sum).min(1.0)
    } else {
        // continued fraction for Q
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=CF_MAX_ITER {
            let i = i as f64;
            let an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < CF_EPS {
                break;
            }
        }
        1.0 - ln_front.exp() * h
    }
}

fn gamma_pdf(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    (ln_gamma_prefactor(a, x) - x.ln()).exp()
}

/// Quantile of the chi-square distribution with `df` degrees of freedom.
pub fn qchisq(p: f64, df: u64) -> Result<f64> {
    if df == 0 {
        return Err(ModeError::Domain("chi-square needs df ≥ 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(ModeError::Domain(format!("p = {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    let a = df as f64 / 2.0;
    let mut hi = a.max(1.0);
    while reg_lower_gamma_unchecked(a, hi) < p {
        hi *= 2.0;
    }
    let x = invert_monotone(
        p,
        0.0,
        hi,
        a.min(hi),
        |x| reg_lower_gamma_unchecked(a, x),
        |x| gamma_pdf(a, x),
    );
    Ok(2.0 * x)
}

/// Chi-square CDF.
pub fn pchisq(x: f64, df: u64) -> Result<f64> {
    if df == 0 {
        return Err(ModeError::Domain("chi-square needs df ≥ 1".into()));
    }
    reg_lower_gamma(df as f64 / 2.0, (x / 2.0).max(0.0))
}

/// Standard normal CDF via `P(½, z²/2)`.
pub fn std_normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    let half = 0.5 * reg_lower_gamma_unchecked(0.5, 0.5 * z * z);
    if z >= 0.0 {
        0.5 + half
    } else {
        0.5 - half
    }
}

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/// Identifies one reproducible random sequence.
///
/// Backed by ChaCha8 with the stream id as the cipher's stream selector, so
/// distinct ids give non-overlapping sequences for the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// A stream with a seed derived from this one and `salt`.
    pub fn derive(&self, salt: u64) -> Self {
        Self::new(mix64(self.seed ^ mix64(salt)), self.stream_id)
    }

    pub fn with_id(&self, stream_id: u64) -> Self {
        Self::new(self.seed, stream_id)
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform variate in the open interval `(0, 1)` from 53 random bits.
#[inline]
pub fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

pub fn sample_uniform(stream: RngStream, n: usize) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..n).map(|_| open_unit(&mut rng)).collect()
}
