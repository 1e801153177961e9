//! Nested order-statistic confidence interval for the mode (method M1).
//!
//! Order statistics are grouped into blocks of `2^{B+s_n}` spacings at each
//! level `B`. Starting from the coarsest level, the shortest block is taken
//! together with the longest run of neighbours whose width stays within a
//! Beta-quantile ratio `h_B` of it. The surviving run restricts the candidates
//! on the next finer level. At level 0 the run is reported, widened by the
//! Lanke extension `λ·(X_(n) − X_(1))` on each side where it touches the
//! sample edge.

use crate::error::{ModeError, Result};
use crate::numerics::{qbeta, Probability};
use crate::sample::SortedSample;
use crate::set::ConfidenceSet;

const METHOD: &str = "M1 (order-statistic spacings)";

/// All derived quantities for a given `(n, α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacingsPlan {
    pub n: usize,
    pub alpha: Probability,
    pub s_n: u32,
    pub b_max: u32,
    /// `n_B` for `B = 0..=b_max`.
    pub n_b: Vec<usize>,
    pub t_n: f64,
    /// Width-ratio tolerances `h_B ≥ 1`.
    pub h_b: Vec<f64>,
    pub lambda: f64,
}

/// `s_n = ⌈log₂ ln n⌉`, or `None` when `ln n ≤ 0`.
fn level_offset(n: usize) -> Option<u32> {
    let ln = (n as f64).ln();
    if ln <= 0.0 {
        return None;
    }
    let s = ln.log2().ceil();
    Some(s.max(0.0) as u32)
}

/// Lanke's tail factor `λ = (α/2)^{−1/(n−1)} − 1`.
pub fn lanke_lambda(n: usize, alpha: Probability) -> Result<f64> {
    if n < 2 {
        return Err(ModeError::infeasible(METHOD, "Lanke extension needs n ≥ 2"));
    }
    Ok((-(alpha.get() / 2.0).ln() / (n - 1) as f64).exp_m1())
}

impl SpacingsPlan {
    pub fn new(n: usize, alpha: Probability) -> Result<Self> {
        if !(alpha.get() > 0.0 && alpha.get() < 1.0) {
            return Err(ModeError::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        let too_small = || {
            ModeError::infeasible(
                METHOD,
                format!("sample too small for M1 (n = {n}): needs ⌊log₂(n/8)⌋ ≥ ⌈log₂ ln n⌉"),
            )
        };
        let s_n = level_offset(n).ok_or_else(too_small)?;
        // ⌊log₂(n/8)⌋ = ⌊log₂ n⌋ − 3 for integer n
        let floor_log2 = (usize::BITS - 1 - n.leading_zeros()) as i64;
        let b_max = floor_log2 - 3 - s_n as i64;
        if b_max < 0 {
            return Err(too_small());
        }
        let b_max = b_max as u32;

        let n_b: Vec<usize> = (0..=b_max).map(|b| (n - 1) >> (b + s_n)).collect();
        if n_b.iter().any(|&k| k < 1) {
            return Err(too_small());
        }
        let t_n: f64 = (0..=b_max).map(|b| 1.0 / (b as f64 + 2.0)).sum();

        let mut h_b = Vec::with_capacity(n_b.len());
        for (b, &count) in n_b.iter().enumerate() {
            let block = (1usize << (b as u32 + s_n)) as f64;
            let shape_b = n as f64 + 1.0 - block;
            let level = alpha.get() / (4.0 * (b as f64 + 2.0) * count as f64 * t_n);
            let lower = qbeta(level, block, shape_b)?;
            // upper quantile through the reflection I_x(a,b) = 1 − I_{1−x}(b,a)
            let upper = 1.0 - qbeta(level, shape_b, block)?;
            h_b.push(upper / lower);
        }

        Ok(Self {
            n,
            alpha,
            s_n,
            b_max,
            n_b,
            t_n,
            h_b,
            lambda: lanke_lambda(n, alpha)?,
        })
    }

    /// Number of spacings per block at level `b`.
    pub fn block(&self, b: u32) -> usize {
        1usize << (b + self.s_n)
    }

    /// Level-`b` intervals `I_{b,i} = [X_(1+(i−1)·2^{b+s_n}), X_(1+i·2^{b+s_n})]`.
    pub fn level_intervals(&self, sample: &SortedSample, b: u32) -> Vec<(f64, f64)> {
        let m = self.block(b);
        let x = sample.values();
        (0..self.n_b[b as usize])
            .map(|i| (x[i * m], x[(i + 1) * m]))
            .collect()
    }
}

/// Contiguous run `[first, last]` of interval indices on one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Run {
    first: usize,
    last: usize,
}

/// Picks the narrowest candidate (smallest index on ties) and grows the
/// maximal run of neighbours with `width ≤ ratio · min_width`.
fn grow_run(widths: &[f64], candidates: Run, ratio: f64) -> Run {
    let mut i_min = candidates.first;
    for i in candidates.first..=candidates.last {
        if widths[i] < widths[i_min] {
            i_min = i;
        }
    }
    let limit = ratio * widths[i_min];
    let mut first = i_min;
    while first > candidates.first && widths[first - 1] <= limit {
        first -= 1;
    }
    let mut last = i_min;
    while last < candidates.last && widths[last + 1] <= limit {
        last += 1;
    }
    Run { first, last }
}

/// Method M1 with a precomputed plan.
pub fn m1_with_plan(sample: &SortedSample, plan: &SpacingsPlan) -> Result<ConfidenceSet> {
    if sample.len() != plan.n {
        return Err(ModeError::InvalidParameter(format!(
            "plan built for n = {} but sample has {} points",
            plan.n,
            sample.len()
        )));
    }
    let x = sample.values();

    let mut candidates = Run {
        first: 0,
        last: plan.n_b[plan.b_max as usize] - 1,
    };
    let mut run = candidates;
    for b in (0..=plan.b_max).rev() {
        let m = plan.block(b);
        let count = plan.n_b[b as usize];
        if b < plan.b_max {
            // level-b intervals lying inside the union of the coarser run
            let coarse = plan.block(b + 1);
            let lo_idx = run.first * coarse;
            let hi_idx = (run.last + 1) * coarse;
            let first = lo_idx.div_ceil(m);
            let last = (hi_idx / m).min(count) - 1;
            candidates = Run { first, last };
        }
        let widths: Vec<f64> = (0..count).map(|i| x[(i + 1) * m] - x[i * m]).collect();
        run = grow_run(&widths, candidates, plan.h_b[b as usize]);
    }

    let m0 = plan.block(0);
    let n0 = plan.n_b[0];
    let tail = plan.lambda * sample.range();
    let lo = if run.first == 0 {
        sample.min() - tail
    } else {
        x[run.first * m0]
    };
    // The right extension starts at X_(n); when (n−1) is not a multiple of the
    // block size the leftover order statistics between the last block and
    // X_(n) are bridged so the result stays a single interval.
    let hi = if run.last == n0 - 1 {
        sample.max() + tail
    } else {
        x[(run.last + 1) * m0]
    };
    ConfidenceSet::single(lo, hi)
}

/// Method M1: finite-sample valid interval from nested order-statistic
/// spacings.
pub fn m1_confidence_interval(sample: &SortedSample, alpha: Probability) -> Result<ConfidenceSet> {
    let plan = SpacingsPlan::new(sample.len(), alpha)?;
    m1_with_plan(sample, &plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha(a: f64) -> Probability {
        Probability::level(a).unwrap()
    }

    #[test]
    fn plan_for_thousand() {
        let plan = SpacingsPlan::new(1000, alpha(0.05)).unwrap();
        assert_eq!(plan.s_n, 3);
        assert_eq!(plan.b_max, 3);
        assert_eq!(plan.n_b, vec![124, 62, 31, 15]);
        assert!((plan.t_n - 77.0 / 60.0).abs() < 1e-15);
        assert!(plan.h_b.iter().all(|&h| h >= 1.0));
        assert!(plan.lambda > 0.0);
    }

    #[test]
    fn lambda_two_points() {
        assert!((lanke_lambda(2, alpha(0.05)).unwrap() - 39.0).abs() < 1e-12);
    }

    #[test]
    fn small_samples_are_rejected() {
        let err = SpacingsPlan::new(16, alpha(0.05)).unwrap_err();
        assert!(err.is_infeasible());
        assert!(err.to_string().contains("sample too small"));
        assert!(SpacingsPlan::new(1, alpha(0.05)).is_err());
        assert!(SpacingsPlan::new(2, alpha(0.05)).is_err());
        // smallest n with b_max ≥ 0 is 64 (s_n = 3 from n = 21 on)
        assert!(SpacingsPlan::new(63, alpha(0.05)).is_err());
        assert_eq!(SpacingsPlan::new(64, alpha(0.05)).unwrap().b_max, 0);
    }

    #[test]
    fn level_intervals_share_endpoints() {
        let data: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let s = SortedSample::new(data).unwrap();
        let plan = SpacingsPlan::new(200, alpha(0.1)).unwrap();
        for b in 0..=plan.b_max {
            let ivs = plan.level_intervals(&s, b);
            assert_eq!(ivs.len(), plan.n_b[b as usize]);
            for w in ivs.windows(2) {
                assert_eq!(w[0].1, w[1].0);
            }
        }
    }

    #[test]
    fn run_growth_rule() {
        let w = [5.0, 2.0, 1.0, 1.5, 3.0, 1.0];
        let r = grow_run(&w, Run { first: 0, last: 5 }, 2.0);
        assert_eq!(r, Run { first: 1, last: 3 });
        let r = grow_run(&w, Run { first: 3, last: 5 }, 2.0);
        assert_eq!(r, Run { first: 5, last: 5 });
        // zero minimum only admits zero-width neighbours
        let w = [0.0, 0.0, 1e-12, 0.0];
        let r = grow_run(&w, Run { first: 0, last: 3 }, 10.0);
        assert_eq!(r, Run { first: 0, last: 1 });
    }

    #[test]
    fn equally_spaced_sample_spans_everything() {
        for n in [129usize, 257, 1025] {
            let data: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
            let s = SortedSample::new(data).unwrap();
            let plan = SpacingsPlan::new(n, alpha(0.05)).unwrap();
            let ci = m1_with_plan(&s, &plan).unwrap();
            let iv = ci.intervals()[0];
            assert_eq!(ci.len(), 1);
            assert!((iv.lo + plan.lambda).abs() < 1e-12, "n = {n}");
            assert!((iv.hi - 1.0 - plan.lambda).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn plan_size_mismatch() {
        let plan = SpacingsPlan::new(100, alpha(0.05)).unwrap();
        let s = SortedSample::new((0..101).map(f64::from).collect()).unwrap();
        assert!(m1_with_plan(&s, &plan).is_err());
    }
}
