//! Confidence sets built from Edelman's single-observation inequality.
//!
//! For one draw `X` of a unimodal law with mode `θ₀` and any fixed `a`,
//! `θ₀ ∈ [X − (2/α − 1)|X − a|, X + (2/α + 1)|X − a|]` with probability at
//! least `1 − α`. Inverting it at `a = θ̂₁` (a pilot from the other half of
//! the sample) gives per-point p-values `p_i(θ) = 2 / (1 + |X_i − θ| / |X_i − θ̂₁|)`.
//!
//! * M3 combines them with Fisher's statistic `−2 Σ ln p_i(θ)` against the
//!   `χ²_{2n}` quantile.
//! * M3' bounds the mean of `((ρ−1)/(ρ+1))·|(X_i − θ)/(X_i − θ̂₁)|^{1/ρ}` by
//!   Markov's inequality and needs no independence between points.

use crate::error::{ModeError, Result};
use crate::levelset::{Profile, RatioSum};
use crate::mest::split_and_pilot;
use crate::numerics::{qchisq, Probability};
use crate::sample::{SortedSample, SplitConfig};
use crate::set::ConfidenceSet;

pub const DEFAULT_RHO: f64 = 2.0;

/// The single-observation interval, with the asymmetric `∓1` coefficients.
pub fn edelman_single_interval(x: f64, a: f64, alpha: Probability) -> Result<ConfidenceSet> {
    let al = alpha.get();
    if !(al > 0.0 && al < 1.0) {
        return Err(ModeError::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {al}"
        )));
    }
    let d = (x - a).abs();
    ConfidenceSet::single(x - (2.0 / al - 1.0) * d, x + (2.0 / al + 1.0) * d)
}

/// `p_i(θ) = 2 / (1 + |(x − θ)/(x − pilot)|)`, in `(0, 2]`.
#[inline]
pub fn edelman_p_value(x: f64, theta: f64, pilot: f64) -> f64 {
    2.0 / (1.0 + ((x - theta) / (x - pilot)).abs())
}

/// Pilot and evaluation points of an Edelman construction.
#[derive(Debug, Clone)]
pub struct EdelmanStatistic {
    pub pilot: f64,
    pub points: Vec<f64>,
    inv_dist: Vec<f64>,
}

impl EdelmanStatistic {
    pub fn new(pilot: f64, points: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(ModeError::InvalidData("evaluation half is empty".into()));
        }
        if points.contains(&pilot) {
            return Err(ModeError::InvalidData(format!(
                "an evaluation point equals the pilot {pilot}; p-values are undefined"
            )));
        }
        Ok(Self {
            pilot,
            points: points.to_vec(),
            inv_dist: points.iter().map(|&x| 1.0 / (x - pilot).abs()).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Fisher's combination `−2 Σ ln p_i(θ)`.
    pub fn fisher(&self, theta: f64) -> f64 {
        self.points
            .iter()
            .map(|&x| -2.0 * edelman_p_value(x, theta, self.pilot).ln())
            .sum()
    }

    /// `(1/n)·((ρ−1)/(ρ+1))·Σ |(X_i − θ)/(X_i − θ̂₁)|^{1/ρ}`.
    pub fn markov(&self, theta: f64, rho: f64) -> f64 {
        let s: f64 = self
            .points
            .iter()
            .map(|&x| ((x - theta) / (x - self.pilot)).abs().powf(1.0 / rho))
            .sum();
        (rho - 1.0) / (rho + 1.0) * s / self.n() as f64
    }

    /// M3 on this statistic: `{θ : fisher(θ) < χ²(1−α, 2n)}`.
    pub fn fisher_set(&self, alpha: Probability) -> Result<ConfidenceSet> {
        let n = self.n();
        let cutoff = qchisq(1.0 - alpha.get(), 2 * n as u64)?;
        // −2 ln p = 2 ln(1 + r) − 2 ln 2
        let budget = 0.5 * cutoff + n as f64 * std::f64::consts::LN_2;
        let sum = RatioSum::new(&self.points, &self.inv_dist, Profile::Log1p);
        Ok(sum.sublevel_set(budget))
    }

    /// M3' on this statistic: `{θ : markov(θ, ρ) < 1/α}`.
    pub fn markov_set(&self, alpha: Probability, rho: f64) -> Result<ConfidenceSet> {
        check_rho(rho)?;
        let n = self.n() as f64;
        let budget = n * (rho + 1.0) / ((rho - 1.0) * alpha.get());
        if !budget.is_finite() {
            return Err(ModeError::InvalidParameter(format!(
                "rho = {rho} too close to 1 for a bounded set"
            )));
        }
        let sum = RatioSum::new(&self.points, &self.inv_dist, Profile::Root { rho });
        Ok(sum.sublevel_set(budget))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 1.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(ModeError::InvalidParameter(format!(
            "rho must exceed 1, got {rho}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdelmanOutcome {
    pub set: ConfidenceSet,
    pub pilot: f64,
}

fn build(data: &[f64], split: &SplitConfig, method: &'static str) -> Result<EdelmanStatistic> {
    let (pilot, half): (f64, SortedSample) = split_and_pilot(data, split, method)?;
    EdelmanStatistic::new(pilot, half.values())
}

/// Method M3: Fisher combination of Edelman p-values.
pub fn m3_confidence_set(
    data: &[f64],
    alpha: Probability,
    split: &SplitConfig,
) -> Result<EdelmanOutcome> {
    let stat = build(data, split, "M3 (Edelman/Fisher)")?;
    Ok(EdelmanOutcome {
        set: stat.fisher_set(alpha)?,
        pilot: stat.pilot,
    })
}

/// Method M3': Markov bound, valid for dependent observations.
pub fn m3prime_confidence_set(
    data: &[f64],
    alpha: Probability,
    rho: f64,
    split: &SplitConfig,
) -> Result<EdelmanOutcome> {
    check_rho(rho)?;
    let stat = build(data, split, "M3' (Edelman/Markov)")?;
    Ok(EdelmanOutcome {
        set: stat.markov_set(alpha, rho)?,
        pilot: stat.pilot,
    })
}
