use modeset_core::edelman::EdelmanStatistic;
use modeset_core::mest::{level_set, WindowStatistic};
use modeset_core::numerics::{open_unit, qchisq};
use modeset_core::{ConfidenceSet, Probability, RngStream, SortedSample};
use proptest::prelude::*;

/// `#{i : X_i − h ≤ θ < X_i + h}` by direct counting.
fn brute_count(points: &[f64], h: f64, theta: f64) -> usize {
    points
        .iter()
        .filter(|&&x| x - h <= theta && theta < x + h)
        .count()
}

fn random_points(rng: &mut impl rand::RngCore, n: usize) -> Vec<f64> {
    // mix of clustered and spread points so windows overlap unevenly
    (0..n)
        .map(|_| {
            let u = open_unit(rng);
            if open_unit(rng) < 0.5 {
                u * u * 2.0
            } else {
                10.0 * u - 5.0
            }
        })
        .collect()
}

fn min_positive_gap(sorted: &[f64]) -> f64 {
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn window_sweep_matches_brute_force() {
    let mut rng = RngStream::new(31, 0).rng();
    let mut vacuous_cases = 0;
    for case in 0..100 {
        let n = 2 + (open_unit(&mut rng) * 49.0) as usize;
        let points = random_points(&mut rng, n);
        let h = 0.05 + open_unit(&mut rng);
        let sample = SortedSample::from_slice(&points).unwrap();
        let stat = WindowStatistic::new(&sample, h);
        let pilot = points[(open_unit(&mut rng) * n as f64) as usize];
        let top = brute_count(&points, h, pilot) as f64;
        // slack sometimes exceeds the pilot count to exercise the clamp
        let slack = open_unit(&mut rng) * (top + 2.0);
        let (set, vacuous) = level_set(&stat, pilot, slack);
        let threshold = top - slack;
        vacuous_cases += vacuous as usize;
        assert_eq!(vacuous, threshold <= 0.0);

        let bps = &stat.breakpoints;
        let step = min_positive_gap(bps) / 3.5;
        let (lo, hi) = (bps[0] - 1.0, bps[bps.len() - 1] + 1.0);
        let mut theta = lo + 0.5 * step;
        let mut mismatches = 0;
        while theta < hi {
            if !bps.contains(&theta) {
                let inside = if threshold <= 0.0 {
                    theta >= bps[0] && theta <= bps[bps.len() - 1]
                } else {
                    brute_count(&points, h, theta) as f64 >= threshold
                };
                mismatches += (inside != set.contains(theta)) as usize;
            }
            theta += step;
        }
        assert_eq!(mismatches, 0, "case {case}: n = {n}, h = {h}");
    }
    assert!(vacuous_cases > 0 && vacuous_cases < 100);
}

/// Distance from `t` to the nearest endpoint of `set`.
fn boundary_distance(set: &ConfidenceSet, t: f64) -> f64 {
    set.intervals()
        .iter()
        .flat_map(|iv| [iv.lo, iv.hi])
        .map(|e| (e - t).abs())
        .fold(f64::INFINITY, f64::min)
}

fn grid_mismatches(set: &ConfidenceSet, points: &[f64], inside: impl Fn(f64) -> bool) -> usize {
    let (dmin, dmax) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let (lo, hi) = match set.hull() {
        Some(h) => (h.lo.min(dmin), h.hi.max(dmax)),
        None => (dmin, dmax),
    };
    let span = hi - lo;
    let (lo, hi) = (lo - 0.5 * span, hi + 0.5 * span);
    let steps = 100_000;
    let tol = 1e-9 * span.max(1.0);
    (0..=steps)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.29) / steps as f64)
        .filter(|&t| boundary_distance(set, t) > tol)
        .filter(|&t| inside(t) != set.contains(t))
        .count()
}

#[test]
fn edelman_extraction_matches_grid() {
    let mut rng = RngStream::new(47, 0).rng();
    let alpha = Probability::level(0.05).unwrap();
    for case in 0..50 {
        let n = 2 + (open_unit(&mut rng) * 39.0) as usize;
        let points = random_points(&mut rng, n);
        let pilot = 4.0 * open_unit(&mut rng) - 2.0;
        let stat = EdelmanStatistic::new(pilot, &points).unwrap();

        let cutoff = qchisq(0.95, 2 * n as u64).unwrap();
        let fisher = stat.fisher_set(alpha).unwrap();
        let bad = grid_mismatches(&fisher, &points, |t| stat.fisher(t) < cutoff);
        assert_eq!(bad, 0, "fisher case {case}");
        assert!(fisher.contains(pilot));

        let rho = 1.2 + 3.0 * open_unit(&mut rng);
        let markov = stat.markov_set(alpha, rho).unwrap();
        let bad = grid_mismatches(&markov, &points, |t| {
            stat.markov(t, rho) < 1.0 / alpha.get()
        });
        assert_eq!(bad, 0, "markov case {case}, rho = {rho}");
        assert!(markov.contains(pilot));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn larger_slack_gives_larger_set(
        pts in prop::collection::vec(-5.0f64..5.0, 3..40),
        h in 0.05f64..1.0,
        s1 in 0.0f64..20.0,
        ds in 0.0f64..20.0,
    ) {
        let sample = SortedSample::from_slice(&pts).unwrap();
        let stat = WindowStatistic::new(&sample, h);
        let pilot = pts[0];
        let (small, _) = level_set(&stat, pilot, s1);
        let (big, _) = level_set(&stat, pilot, s1 + ds);
        prop_assert!(small.is_subset_of(&big));
        prop_assert!(small.contains(pilot));
    }
}
