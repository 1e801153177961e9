use modeset_core::sample::{default_pilot_window, venter_pilot};
use modeset_core::sim::{sample_uniform_disk, FBetaDensity};
use modeset_core::{RngStream, SortedSample};

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Composite Simpson rule with `m` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let inner: f64 = (1..m)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// `∫` of `f` over `[−1, 0]` and `[0, upper]`, substituting `x = ∓t²` to
/// smooth the `|x|^β` cusp at the mode.
fn integrate_pieces(f: impl Fn(f64) -> f64, upper: f64) -> (f64, f64) {
    let m = 200_000;
    let left = simpson(|t| f(-t * t) * 2.0 * t, 0.0, 1.0, m);
    let right = simpson(|t| f(t * t) * 2.0 * t, 0.0, upper.sqrt(), m);
    (left, right)
}

#[test]
fn fbeta_sampler_passes_ks() {
    let n = 100_000;
    for (k, beta) in [0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
        let f = FBetaDensity::new(beta).unwrap();
        let xs = f.sample(RngStream::new(123, k as u64), n);
        let d = ks_distance(xs, |x| f.cdf(x));
        assert!(d <= 1.63 / (n as f64).sqrt(), "β = {beta}: D = {d}");
    }
}

#[test]
fn fbeta_moments_by_quadrature() {
    for beta in [0.5, 1.0, 2.0, 4.0] {
        let f = FBetaDensity::new(beta).unwrap();
        let (left, right) = integrate_pieces(|x| f.pdf(x), f.upper());
        assert!(
            (left + right - 1.0).abs() < 1e-10,
            "β = {beta}: mass {}",
            left + right
        );
        assert!((left - f.cdf(0.0)).abs() < 1e-10);
    }

    let f = FBetaDensity::new(1.0).unwrap();
    let (l1, r1) = integrate_pieces(|x| x * f.pdf(x), 3.0);
    let (l2, r2) = integrate_pieces(|x| x * x * f.pdf(x), 3.0);
    let (mean, second) = (l1 + r1, l2 + r2);
    // hand integral: −1/4 + 1/6 + 3/4
    assert!((mean - 2.0 / 3.0).abs() < 1e-10);
    let sd = (second - mean * mean).sqrt();

    let n = 1_000_000;
    let xs = f.sample(RngStream::new(77, 0), n);
    let emp = xs.iter().sum::<f64>() / n as f64;
    assert!(
        (emp - mean).abs() <= 3.0 * sd / (n as f64).sqrt(),
        "{emp} vs {mean}"
    );
}

#[test]
fn dependent_sampler_keeps_marginals() {
    let f = FBetaDensity::new(1.0).unwrap();
    // one value per independent dataset, so the draws are iid f₁
    let xs: Vec<f64> = (0..20_000)
        .map(|r| f.sample_dependent(RngStream::new(5, r), 3, 0.5).unwrap()[1])
        .collect();
    let d = ks_distance(xs, |x| f.cdf(x));
    assert!(d <= 1.63 / (20_000f64).sqrt());
    assert!(f.sample_dependent(RngStream::new(5, 0), 3, 1.0).is_err());
}

#[test]
fn disk_radius_squared_is_uniform() {
    let n = 100_000;
    let pts = sample_uniform_disk(RngStream::new(8, 0), n, [0.3, -0.7], 2.0);
    let r2: Vec<f64> = pts
        .chunks_exact(2)
        .map(|p| ((p[0] - 0.3).powi(2) + (p[1] + 0.7).powi(2)) / 4.0)
        .collect();
    let d = ks_distance(r2, |u| u.clamp(0.0, 1.0));
    assert!(d <= 1.63 / (n as f64).sqrt(), "D = {d}");
}

#[test]
fn venter_pilot_is_consistent() {
    let f = FBetaDensity::new(1.0).unwrap();
    let mut medians = Vec::new();
    for (k, n) in [200usize, 2000, 20_000].into_iter().enumerate() {
        let mut errs: Vec<f64> = (0..200)
            .map(|r| {
                let xs = f.sample(RngStream::new(900 + k as u64, r), n);
                let s = SortedSample::new(xs).unwrap();
                venter_pilot(&s, default_pilot_window(n)).unwrap().abs()
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        medians.push(errs[100]);
    }
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "{medians:?}"
    );
}
