use modeset_core::sim::FBetaDensity;
use modeset_core::spacings::{m1_confidence_interval, m1_with_plan};
use modeset_core::{Probability, RngStream, SortedSample, SpacingsPlan};
use proptest::prelude::*;

fn alpha(a: f64) -> Probability {
    Probability::level(a).unwrap()
}

#[test]
fn smaller_alpha_never_shrinks_tolerances() {
    for n in [64usize, 1000, 4096, 20_000] {
        let mut prev: Option<SpacingsPlan> = None;
        for a in [0.5, 0.2, 0.1, 0.05, 0.01, 0.001] {
            let plan = SpacingsPlan::new(n, alpha(a)).unwrap();
            if let Some(p) = &prev {
                for (h_small_alpha, h_large_alpha) in plan.h_b.iter().zip(&p.h_b) {
                    assert!(h_small_alpha >= h_large_alpha, "n = {n}, α = {a}");
                }
                assert!(plan.lambda > p.lambda);
            }
            prev = Some(plan);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_interval_within_extension_bounds(
        pts in prop::collection::vec(-100.0f64..100.0, 64..400),
        a in 0.01f64..0.5,
    ) {
        let s = SortedSample::from_slice(&pts).unwrap();
        let plan = SpacingsPlan::new(s.len(), alpha(a)).unwrap();
        let ci = m1_with_plan(&s, &plan).unwrap();
        prop_assert_eq!(ci.len(), 1);
        let iv = ci.intervals()[0];
        let tail = plan.lambda * s.range();
        prop_assert!(iv.lo >= s.min() - tail - 1e-9);
        prop_assert!(iv.hi <= s.max() + tail + 1e-9);
    }

    #[test]
    fn duplicate_values_are_handled(
        base in prop::collection::vec(0i32..5, 100..200),
    ) {
        let pts: Vec<f64> = base.iter().map(|&v| v as f64).collect();
        let ci = m1_confidence_interval(&SortedSample::from_slice(&pts).unwrap(), alpha(0.05)).unwrap();
        prop_assert_eq!(ci.len(), 1);
    }
}

#[test]
fn coverage_on_smoother_density() {
    let f = FBetaDensity::new(2.0).unwrap();
    let reps = 300;
    let plan = SpacingsPlan::new(2000, alpha(0.05)).unwrap();
    let hits = (0..reps)
        .filter(|&r| {
            let s = SortedSample::new(f.sample(RngStream::new(61, r), 2000)).unwrap();
            m1_with_plan(&s, &plan).unwrap().contains(0.0)
        })
        .count();
    let floor = 0.95 - 2.0 * (0.05f64 * 0.95 / reps as f64).sqrt();
    assert!(hits as f64 / reps as f64 >= floor);
}

/// Nestedness across α is reported, not required.
#[test]
fn nestedness_across_alpha_is_reported() {
    let f = FBetaDensity::new(1.0).unwrap();
    let n = 1000;
    let grid = [0.2, 0.1, 0.05, 0.01, 1.0 / n as f64];
    let plans: Vec<SpacingsPlan> = grid
        .iter()
        .map(|&a| SpacingsPlan::new(n, alpha(a)).unwrap())
        .collect();
    let mut violations = 0;
    let reps = 200;
    for r in 0..reps {
        let s = SortedSample::new(f.sample(RngStream::new(62, r), n)).unwrap();
        let sets: Vec<_> = plans.iter().map(|p| m1_with_plan(&s, p).unwrap()).collect();
        violations += sets
            .windows(2)
            .filter(|w| !w[0].is_subset_of(&w[1]))
            .count();
    }
    eprintln!(
        "M1 nestedness over α ∈ {grid:?}: {violations} violations in {} comparisons",
        reps as usize * (grid.len() - 1)
    );
}
