//! Monte-Carlo coverage and width studies on the `f_β` test family.
//!
//! `f_β(x) = 1/2 − |x|^β/2` on `[−1, 0]` and
//! `f_β(x) = 1/2 − β^β x^β / (2(β+2)^β)` on `[0, (β+2)/β]`, with mode 0.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ModeError, Result};
use crate::mest::Bandwidth;
use crate::method::{confidence_set_with_plan, Method, MethodConfig};
use crate::numerics::{invert_monotone, mix64, open_unit, std_normal_cdf, Probability, RngStream};
use crate::sample::SplitConfig;
use crate::spacings::SpacingsPlan;

/// The piecewise power density with mode 0 and smoothness `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FBetaDensity {
    beta: f64,
    /// `β^β / (β+2)^β`, the right-piece coefficient.
    c: f64,
}

impl FBetaDensity {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(ModeError::InvalidParameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        Ok(Self {
            beta,
            c: (beta / (beta + 2.0)).powf(beta),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Right end of the support, `(β+2)/β`.
    pub fn upper(&self) -> f64 {
        (self.beta + 2.0) / self.beta
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if (-1.0..=0.0).contains(&x) {
            0.5 - 0.5 * (-x).powf(self.beta)
        } else if x > 0.0 && x <= self.upper() {
            0.5 - 0.5 * self.c * x.powf(self.beta)
        } else {
            0.0
        }
    }

    /// Mass of `[−1, 0]`, `β / (2(β+1))`.
    pub fn left_mass(&self) -> f64 {
        self.beta / (2.0 * (self.beta + 1.0))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let b1 = self.beta + 1.0;
        if x <= -1.0 {
            0.0
        } else if x <= 0.0 {
            0.5 * (x + 1.0) + ((-x).powf(b1) - 1.0) / (2.0 * b1)
        } else if x < self.upper() {
            (self.left_mass() + 0.5 * x - self.c * x.powf(b1) / (2.0 * b1)).min(1.0)
        } else {
            1.0
        }
    }

    /// Inverse CDF by safeguarded Newton on the piece holding `u`.
    pub fn quantile(&self, u: f64) -> f64 {
        let f0 = self.left_mass();
        if u <= 0.0 {
            return -1.0;
        }
        if u >= 1.0 {
            return self.upper();
        }
        if u == f0 {
            return 0.0;
        }
        let (lo, hi) = if u < f0 {
            (-1.0, 0.0)
        } else {
            (0.0, self.upper())
        };
        // the density is 1/2 near the mode, a good Newton start
        let start = 2.0 * (u - f0);
        invert_monotone(u, lo, hi, start, |x| self.cdf(x), |x| self.pdf(x))
    }

    pub fn sample(&self, stream: RngStream, n: usize) -> Vec<f64> {
        let mut rng = stream.rng();
        (0..n).map(|_| self.quantile(open_unit(&mut rng))).collect()
    }

    /// Equicorrelated draws with `f_β` marginals: a Gaussian copula with
    /// pairwise correlation `rho`.
    pub fn sample_dependent(&self, stream: RngStream, n: usize, rho: f64) -> Result<Vec<f64>> {
        if !(0.0..1.0).contains(&rho) {
            return Err(ModeError::InvalidParameter(format!(
                "copula correlation must lie in [0, 1), got {rho}"
            )));
        }
        let mut rng = stream.rng();
        let common: f64 = rng.sample(StandardNormal);
        let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
        Ok((0..n)
            .map(|_| {
                let e: f64 = rng.sample(StandardNormal);
                self.quantile(std_normal_cdf(a * common + b * e))
            })
            .collect())
    }
}

/// `n` points uniform on the disk of radius `radius` around `center`,
/// row-major `[x0, y0, x1, y1, ...]`.
pub fn sample_uniform_disk(stream: RngStream, n: usize, center: [f64; 2], radius: f64) -> Vec<f64> {
    let mut rng = stream.rng();
    let mut out = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let r = radius * open_unit(&mut rng).sqrt();
        let phi = std::f64::consts::TAU * open_unit(&mut rng);
        out.push(center[0] + r * phi.cos());
        out.push(center[1] + r * phi.sin());
    }
    out
}

/// M2 bandwidth used in the studies: `n^{−1/(1+2β)} · √(ln n)`.
pub fn study_bandwidth(n: usize, beta: f64) -> f64 {
    let n = n as f64;
    n.powf(-1.0 / (1.0 + 2.0 * beta)) * n.ln().sqrt()
}

/// Linear-interpolation quantile of sorted data; NaN when empty.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        m => {
            let pos = q.clamp(0.0, 1.0) * (m - 1) as f64;
            let i = pos.floor() as usize;
            let frac = pos - i as f64;
            if i + 1 < m {
                sorted[i] + frac * (sorted[i + 1] - sorted[i])
            } else {
                sorted[m - 1]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub methods: Vec<Method>,
    pub n_values: Vec<usize>,
    pub beta_values: Vec<f64>,
    pub alpha: Probability,
    pub replications: usize,
    pub base_seed: u64,
    pub rho: f64,
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(ModeError::InvalidParameter("no methods selected".into()));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(ModeError::InvalidParameter(
                "sample sizes must be positive".into(),
            ));
        }
        if self.beta_values.is_empty() {
            return Err(ModeError::InvalidParameter(
                "no beta values selected".into(),
            ));
        }
        for &b in &self.beta_values {
            FBetaDensity::new(b)?;
        }
        if self.replications == 0 {
            return Err(ModeError::InvalidParameter(
                "replications must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Replicate {
    pub covered: bool,
    /// `None` when the method failed on this dataset.
    pub width: Option<f64>,
    pub vacuous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub method: Method,
    pub n: usize,
    pub beta: f64,
    pub alpha: f64,
    pub replications: usize,
    pub coverage: f64,
    pub width_q10: f64,
    pub width_q50: f64,
    pub width_q90: f64,
    pub vacuous: usize,
    pub errors: usize,
    pub seconds: f64,
    #[serde(skip)]
    pub replicates: Vec<Replicate>,
}

/// Data stream for replication `rep` of cell `(n, β)`; shared by all methods.
pub fn data_stream(base_seed: u64, n: usize, beta: f64, rep: usize) -> RngStream {
    let seed = mix64(base_seed ^ mix64(n as u64 ^ mix64(beta.to_bits())));
    RngStream::new(seed, 2 * rep as u64)
}

fn run_replicate(data: &[f64], cfg: &MethodConfig, plan: Option<&SpacingsPlan>) -> Replicate {
    match confidence_set_with_plan(data, cfg, plan) {
        Ok(est) => Replicate {
            covered: est.set.contains(0.0),
            width: Some(est.set.width()),
            vacuous: est.vacuous,
        },
        Err(_) => Replicate {
            covered: false,
            width: None,
            vacuous: false,
        },
    }
}

/// One study cell. Errors in individual replications are counted, not raised.
pub fn run_cell(method: Method, n: usize, beta: f64, cfg: &StudyConfig) -> Result<CoverageReport> {
    let density = FBetaDensity::new(beta)?;
    let plan = match method {
        Method::M1 => SpacingsPlan::new(n, cfg.alpha).ok(),
        _ => None,
    };
    let base = MethodConfig::new(method, cfg.alpha).with_rho(cfg.rho);
    let base = match method {
        Method::M2 => base.with_bandwidth(Bandwidth::Fixed(study_bandwidth(n, beta))),
        _ => base,
    };
    let start = Instant::now();
    let replicates: Vec<Replicate> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let stream = data_stream(cfg.base_seed, n, beta, rep);
            let data = density.sample(stream, n);
            if method == Method::M1 && plan.is_none() {
                return Replicate {
                    covered: false,
                    width: None,
                    vacuous: false,
                };
            }
            let split = SplitConfig::with_stream(stream.with_id(stream.stream_id + 1));
            let mc = base.clone().with_split(split);
            run_replicate(&data, &mc, plan.as_ref())
        })
        .collect();
    let seconds = start.elapsed().as_secs_f64();
    Ok(summarize(
        method,
        n,
        beta,
        cfg.alpha.get(),
        replicates,
        seconds,
    ))
}

fn summarize(
    method: Method,
    n: usize,
    beta: f64,
    alpha: f64,
    replicates: Vec<Replicate>,
    seconds: f64,
) -> CoverageReport {
    let mut widths: Vec<f64> = replicates.iter().filter_map(|r| r.width).collect();
    widths.sort_by(f64::total_cmp);
    let covered = replicates.iter().filter(|r| r.covered).count();
    CoverageReport {
        method,
        n,
        beta,
        alpha,
        replications: replicates.len(),
        coverage: covered as f64 / replicates.len() as f64,
        width_q10: quantile_sorted(&widths, 0.1),
        width_q50: quantile_sorted(&widths, 0.5),
        width_q90: quantile_sorted(&widths, 0.9),
        vacuous: replicates.iter().filter(|r| r.vacuous).count(),
        errors: replicates.iter().filter(|r| r.width.is_none()).count(),
        seconds,
        replicates,
    }
}

/// Every `(method, n, β)` cell, ordered method-major then `n` then `β`.
pub fn run_coverage_study(cfg: &StudyConfig) -> Result<Vec<CoverageReport>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for &method in &cfg.methods {
        for &n in &cfg.n_values {
            for &beta in &cfg.beta_values {
                out.push(run_cell(method, n, beta, cfg)?);
            }
        }
    }
    Ok(out)
}

pub const REPORT_HEADER: &str =
    "method,n,beta,alpha,reps,coverage,width_q10,width_q50,width_q90,vacuous,errors,seconds";

/// CSV rendering of the reports. The `seconds` column is left empty unless
/// `timings` is set, so repeated runs produce identical bytes.
pub fn reports_to_csv(reports: &[CoverageReport], timings: bool) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for r in reports {
        let secs = if timings {
            format!("{:.3}", r.seconds)
        } else {
            String::new()
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.n,
            r.beta,
            r.alpha,
            r.replications,
            r.coverage,
            r.width_q10,
            r.width_q50,
            r.width_q90,
            r.vacuous,
            r.errors,
            secs
        );
    }
    s
}

/// Long-format per-replication widths: `method,n,beta,rep,width,covered`.
pub fn widths_to_csv(reports: &[CoverageReport]) -> String {
    let mut s = String::from("method,n,beta,rep,width,covered\n");
    for r in reports {
        for (i, rep) in r.replicates.iter().enumerate() {
            let w = rep.width.map(|w| w.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.method, r.n, r.beta, i, w, rep.covered as u8
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_checkpoints() {
        for beta in [0.5, 1.0, 2.0, 4.0] {
            let f = FBetaDensity::new(beta).unwrap();
            assert!((f.cdf(0.0) - beta / (2.0 * (beta + 1.0))).abs() < 1e-15);
            assert!((f.cdf(f.upper()) - 1.0).abs() < 1e-12);
            assert!((f.cdf(f.upper() * (1.0 - 1e-12)) - 1.0).abs() < 1e-9);
            assert_eq!(f.cdf(-1.0), 0.0);
            assert_eq!(f.pdf(0.0), 0.5);
        }
        let f = FBetaDensity::new(1.0).unwrap();
        assert_eq!(f.cdf(0.0), 0.25);
        assert_eq!(f.cdf(3.0), 1.0);
    }

    #[test]
    fn cdf_monotone_and_continuous() {
        for beta in [0.5, 1.0, 2.0, 4.0] {
            let f = FBetaDensity::new(beta).unwrap();
            let (lo, hi) = (-1.5, f.upper() + 0.5);
            let m = 10_000;
            let step = (hi - lo) / m as f64;
            let mut prev = f.cdf(lo);
            for i in 1..=m {
                let cur = f.cdf(lo + i as f64 * step);
                assert!(cur >= prev);
                // Lipschitz with constant max f = 1/2
                assert!(cur - prev <= 0.5 * step + 1e-12);
                prev = cur;
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for beta in [0.5, 1.0, 2.0, 4.0] {
            let f = FBetaDensity::new(beta).unwrap();
            assert_eq!(f.quantile(f.left_mass()), 0.0);
            for i in 1..1000 {
                let u = i as f64 / 1000.0;
                let x = f.quantile(u);
                assert!((f.cdf(x) - u).abs() <= 1e-12, "β={beta} u={u}");
                assert!(x >= -1.0 && x <= f.upper());
            }
        }
    }

    #[test]
    fn mode_neighbourhood_mass() {
        let f = FBetaDensity::new(1.0).unwrap();
        let n = 100_000;
        let xs = f.sample(RngStream::new(5, 0), n);
        let eps = 0.01;
        let p = f.cdf(eps) - f.cdf(-eps);
        assert!((p - eps).abs() < 1e-4);
        let hits = xs.iter().filter(|x| x.abs() <= eps).count() as f64;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits - n as f64 * p).abs() <= 3.0 * sd);
    }

    #[test]
    fn disk_radius_range() {
        let pts = sample_uniform_disk(RngStream::new(1, 0), 1000, [2.0, -1.0], 0.5);
        for p in pts.chunks_exact(2) {
            let r2 = (p[0] - 2.0).powi(2) + (p[1] + 1.0).powi(2);
            assert!(r2 <= 0.25 + 1e-12);
        }
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&v, 0.5), 3.0);
        assert_eq!(quantile_sorted(&v, 0.1), 1.4);
        assert!(quantile_sorted(&[], 0.5).is_nan());
    }

    #[test]
    fn study_is_deterministic() {
        let cfg = StudyConfig {
            methods: vec![Method::M1, Method::M3],
            n_values: vec![300],
            beta_values: vec![1.0],
            alpha: Probability::level(0.05).unwrap(),
            replications: 20,
            base_seed: 9,
            rho: 2.0,
        };
        let a = run_coverage_study(&cfg).unwrap();
        let b = run_coverage_study(&cfg).unwrap();
        assert_eq!(reports_to_csv(&a, false), reports_to_csv(&b, false));
        assert_eq!(a[0].replicates, b[0].replicates);
        assert_eq!(a.len(), 2);
        assert!(reports_to_csv(&a, false).starts_with(REPORT_HEADER));
    }
}
