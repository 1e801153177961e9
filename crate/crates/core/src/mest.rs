//! M-estimation confidence sets (methods M2 and M2').
//!
//! With the box loss `m_{θ;h}(x) = −(1/2h)·1{θ−h < x ≤ θ+h}` the empirical
//! criterion difference is `(N(θ̂₁) − N(θ)) / (2hn)`, where `N(θ)` counts
//! evaluation points in the window `(θ−h, θ+h]`. The confidence condition
//! therefore reduces to an integer count test `N(θ) ≥ N(θ̂₁) − slack` with a
//! slack that does not depend on `h`, and the solution set is read exactly
//! off the piecewise-constant window count.

use rayon::prelude::*;

use crate::error::{ModeError, Result};
use crate::numerics::Probability;
use crate::sample::{default_pilot_window, split_sample, venter_pilot, SortedSample, SplitConfig};
use crate::set::{ConfidenceSet, Interval};

/// Number of bandwidths in the default adaptive grid.
pub const DEFAULT_GRID_SIZE: usize = 64;

/// Bandwidth choice for the M-estimation methods.
#[derive(Debug, Clone, PartialEq)]
pub enum Bandwidth {
    Fixed(f64),
    /// Explicit grid searched by the adaptive method.
    Grid(Vec<f64>),
    /// Geometric grid of `size` points from half the smallest positive gap
    /// of the evaluation half to its range.
    Auto {
        size: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MEstConfig {
    pub alpha: Probability,
    pub bandwidth: Bandwidth,
    pub split: SplitConfig,
}

impl MEstConfig {
    pub fn fixed(alpha: Probability, h: f64, split: SplitConfig) -> Self {
        Self {
            alpha,
            bandwidth: Bandwidth::Fixed(h),
            split,
        }
    }

    pub fn adaptive(alpha: Probability, split: SplitConfig) -> Self {
        Self {
            alpha,
            bandwidth: Bandwidth::Auto {
                size: DEFAULT_GRID_SIZE,
            },
            split,
        }
    }
}

/// Result of an M-estimation construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MEstOutcome {
    pub set: ConfidenceSet,
    /// Bandwidth that produced `set`.
    pub h: f64,
    pub pilot: f64,
    /// The count condition excluded nothing and the set was clamped to the
    /// breakpoint hull before dilation.
    pub vacuous: bool,
}

/// Window occupancy `N(θ) = #{i : θ − h < X_i ≤ θ + h}` as a right-continuous
/// step function: `+1` at each `X_i − h`, `−1` at each `X_i + h`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStatistic {
    /// Distinct sorted breakpoints.
    pub breakpoints: Vec<f64>,
    /// `counts[k]` is `N` on `[breakpoints[k], breakpoints[k+1])`.
    pub counts: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl WindowStatistic {
    pub fn new(points: &SortedSample, h: f64) -> Self {
        let lower: Vec<f64> = points.values().iter().map(|x| x - h).collect();
        let upper: Vec<f64> = points.values().iter().map(|x| x + h).collect();

        let mut events: Vec<(f64, i64)> = lower
            .iter()
            .map(|&b| (b, 1))
            .chain(upper.iter().map(|&b| (b, -1)))
            .collect();
        events.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut breakpoints = Vec::with_capacity(events.len());
        let mut counts = Vec::with_capacity(events.len());
        let mut level: i64 = 0;
        for (pos, delta) in events {
            level += delta;
            if breakpoints.last() == Some(&pos) {
                *counts.last_mut().unwrap() = level as usize;
            } else {
                breakpoints.push(pos);
                counts.push(level as usize);
            }
        }
        Self {
            breakpoints,
            counts,
            lower,
            upper,
        }
    }

    /// `N(θ)`.
    pub fn count_at(&self, theta: f64) -> usize {
        let entered = self.lower.partition_point(|&b| b <= theta);
        let left = self.upper.partition_point(|&b| b <= theta);
        entered - left
    }

    /// Closed union of the segments with `N ≥ threshold`, for a positive
    /// threshold.
    fn superlevel(&self, threshold: f64) -> ConfidenceSet {
        let mut out = Vec::new();
        let mut k = 0;
        let segs = self.breakpoints.len().saturating_sub(1);
        while k < segs {
            if self.counts[k] as f64 >= threshold {
                let start = self.breakpoints[k];
                while k < segs && self.counts[k] as f64 >= threshold {
                    k += 1;
                }
                out.push(Interval {
                    lo: start,
                    hi: self.breakpoints[k],
                });
            } else {
                k += 1;
            }
        }
        ConfidenceSet::from_intervals(out)
    }

    fn hull(&self) -> Interval {
        Interval {
            lo: self.breakpoints[0],
            hi: *self.breakpoints.last().unwrap(),
        }
    }
}

/// Count slack for the fixed-bandwidth threshold
/// `(1/h)·√(3/(2n))·[√ln(1/α) + 2]`; multiplying by `2hn` gives
/// `√(6n)·[√ln(1/α) + 2]`.
pub fn hoeffding_count_slack(n: usize, alpha: Probability) -> f64 {
    (6.0 * n as f64).sqrt() * ((1.0 / alpha.get()).ln().sqrt() + 2.0)
}

/// Count slack for the simultaneous threshold `(1/h)·√(2 ln(2/α)/n)`, i.e.
/// `2·√(2n·ln(2/α))`.
pub fn dkw_count_slack(n: usize, alpha: Probability) -> f64 {
    2.0 * (2.0 * n as f64 * (2.0 / alpha.get()).ln()).sqrt()
}

/// The set `{θ : N(θ) ≥ N(θ̂₁) − slack}` before dilation, clamped to the
/// breakpoint hull when the condition is vacuous. Returns `(set, vacuous)`.
pub fn level_set(stat: &WindowStatistic, pilot: f64, slack: f64) -> (ConfidenceSet, bool) {
    let threshold = stat.count_at(pilot) as f64 - slack;
    if threshold <= 0.0 {
        let hull = stat.hull();
        let set = ConfidenceSet::from_intervals(vec![hull]);
        (set, true)
    } else {
        (stat.superlevel(threshold), false)
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(ModeError::InvalidParameter(format!(
            "bandwidth h must be positive, got {h}"
        )))
    }
}

/// Splits the data and computes the pilot on the first half.
pub(crate) fn split_and_pilot(
    data: &[f64],
    split: &SplitConfig,
    method: &'static str,
) -> Result<(f64, SortedSample)> {
    if data.len() < 4 {
        return Err(ModeError::infeasible(
            method,
            format!("needs at least 4 observations, got {}", data.len()),
        ));
    }
    let parts = split_sample(data, split.stream, split.fraction)?;
    let r = split
        .pilot_window
        .unwrap_or_else(|| default_pilot_window(parts.first.len()));
    let pilot = venter_pilot(&parts.first, r).map_err(|e| match e {
        ModeError::Infeasible { reason, .. } => ModeError::infeasible(method, reason),
        other => other,
    })?;
    Ok((pilot, parts.second))
}

fn m2_on_half(points: &SortedSample, pilot: f64, h: f64, slack: f64) -> MEstOutcome {
    let stat = WindowStatistic::new(points, h);
    let (set, vacuous) = level_set(&stat, pilot, slack);
    MEstOutcome {
        set: set.dilate(h),
        h,
        pilot,
        vacuous,
    }
}

/// Method M2: fixed bandwidth `h`.
pub fn m2_confidence_set(data: &[f64], cfg: &MEstConfig) -> Result<MEstOutcome> {
    const METHOD: &str = "M2 (M-estimation)";
    let h = match cfg.bandwidth {
        Bandwidth::Fixed(h) => h,
        _ => {
            return Err(ModeError::InvalidParameter(
                "M2 needs a fixed bandwidth h".into(),
            ))
        }
    };
    check_bandwidth(h)?;
    let (pilot, half) = split_and_pilot(data, &cfg.split, METHOD)?;
    let slack = hoeffding_count_slack(half.len(), cfg.alpha);
    Ok(m2_on_half(&half, pilot, h, slack))
}

/// Default adaptive grid: `size` geometric points from half the smallest
/// positive gap to the range of `points`.
pub fn default_bandwidth_grid(points: &SortedSample, size: usize) -> Result<Vec<f64>> {
    let x = points.values();
    let min_gap = x
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&g| g > 0.0)
        .fold(f64::INFINITY, f64::min);
    let range = points.range();
    if !min_gap.is_finite() || range <= 0.0 {
        return Err(ModeError::InvalidData(
            "evaluation half has no positive spacing".into(),
        ));
    }
    let lo = 0.5 * min_gap;
    let hi = range;
    if size <= 1 {
        return Ok(vec![hi]);
    }
    let step = (hi / lo).ln() / (size - 1) as f64;
    Ok((0..size)
        .map(|k| {
            if k == size - 1 {
                hi
            } else {
                lo * (step * k as f64).exp()
            }
        })
        .collect())
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(ModeError::InvalidParameter(
            "bandwidth grid is empty".into(),
        ));
    }
    for &h in grid {
        check_bandwidth(h)?;
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ModeError::InvalidParameter(
            "bandwidth grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Method M2': the width-minimizing bandwidth over a grid, using the
/// DKW threshold that holds simultaneously for every `h`.
pub fn m2_adaptive_confidence_set(data: &[f64], cfg: &MEstConfig) -> Result<MEstOutcome> {
    const METHOD: &str = "M2' (adaptive M-estimation)";
    if let Bandwidth::Grid(grid) = &cfg.bandwidth {
        validate_grid(grid)?;
    }
    if let Bandwidth::Fixed(h) = cfg.bandwidth {
        check_bandwidth(h)?;
    }
    let (pilot, half) = split_and_pilot(data, &cfg.split, METHOD)?;
    let grid = match &cfg.bandwidth {
        Bandwidth::Fixed(h) => vec![*h],
        Bandwidth::Grid(g) => g.clone(),
        Bandwidth::Auto { size } => {
            if *size == 0 {
                return Err(ModeError::InvalidParameter(
                    "bandwidth grid is empty".into(),
                ));
            }
            default_bandwidth_grid(&half, *size)?
        }
    };
    let slack = dkw_count_slack(half.len(), cfg.alpha);
    let outcomes: Vec<MEstOutcome> = grid
        .par_iter()
        .map(|&h| m2_on_half(&half, pilot, h, slack))
        .collect();
    // first minimum keeps the smallest h on ties
    let best = outcomes
        .into_iter()
        .reduce(|best, o| {
            if o.set.width() < best.set.width() {
                o
            } else {
                best
            }
        })
        .expect("grid is nonempty");
    Ok(best)
}
