//! Validated samples, random sample splitting and the spacing pilot estimator.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{ModeError, Result};
use crate::numerics::{open_unit, RngStream};

/// Ascending finite observations; the input order is kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    sorted: Vec<f64>,
    original: Vec<f64>,
}

impl SortedSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(ModeError::InvalidData("sample is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(ModeError::InvalidData(format!(
                "sample contains a non-finite value ({bad})"
            )));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            sorted,
            original: values,
        })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn original(&self) -> &[f64] {
        &self.original
    }

    /// 1-based order statistic `X_(k)`.
    #[inline]
    pub fn order_stat(&self, k: usize) -> f64 {
        self.sorted[k - 1]
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }
}

/// How a sample is divided into a pilot half and an evaluation half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub stream: RngStream,
    /// Expected share of the pilot half `S₁`.
    pub fraction: f64,
    /// Window for [`venter_pilot`]; `None` selects `⌈√n⌉`.
    pub pilot_window: Option<usize>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            stream: RngStream::new(0, 0),
            fraction: 0.5,
            pilot_window: None,
        }
    }
}

impl SplitConfig {
    pub fn with_stream(stream: RngStream) -> Self {
        Self {
            stream,
            ..Self::default()
        }
    }
}

/// Disjoint halves: `first` builds the pilot, `second` is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSplit {
    pub first: SortedSample,
    pub second: SortedSample,
}

/// Random partition without replacement.
///
/// `|S₁|` is `⌊fraction·m⌋`, rounded up with probability equal to the
/// fractional part, so a 0.5 split of an odd sample is `{k, k+1}` or
/// `{k+1, k}` depending on the stream.
pub fn split_sample(data: &[f64], stream: RngStream, fraction: f64) -> Result<SampleSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(ModeError::InvalidParameter(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let m = data.len();
    if m < 2 {
        return Err(ModeError::InvalidData(format!(
            "cannot split a sample of size {m}"
        )));
    }
    let mut rng = stream.rng();
    let exact = fraction * m as f64;
    let mut first_len = exact.floor() as usize;
    let frac = exact - exact.floor();
    if frac > 0.0 && open_unit(&mut rng) < frac {
        first_len += 1;
    }
    if first_len == 0 || first_len >= m {
        return Err(ModeError::InvalidData(format!(
            "split of {m} points with fraction {fraction} leaves an empty half"
        )));
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut rng);
    let first = idx[..first_len].iter().map(|&i| data[i]).collect();
    let second = idx[first_len..].iter().map(|&i| data[i]).collect();
    Ok(SampleSplit {
        first: SortedSample::new(first)?,
        second: SortedSample::new(second)?,
    })
}

/// `⌈√n⌉` clamped to the feasible window range `[1, (n−1)/2]`.
pub fn default_pilot_window(n: usize) -> usize {
    let r = (n as f64).sqrt().ceil() as usize;
    r.clamp(1, ((n.saturating_sub(1)) / 2).max(1))
}

/// Venter's spacing estimator: `X_(K)` where `K` minimizes
/// `X_(j+r) − X_(j−r)` over `j ∈ [r+1, n−r]`, smallest `j` on ties.
pub fn venter_pilot(sample: &SortedSample, r: usize) -> Result<f64> {
    let n = sample.len();
    if r == 0 || n < 2 * r + 1 {
        return Err(ModeError::infeasible(
            "pilot",
            format!("Venter estimator needs n ≥ 2r + 1 with r ≥ 1 (n = {n}, r = {r})"),
        ));
    }
    let x = sample.values();
    // 0-based: centre c ranges over [r, n−1−r]
    let best = (r..n - r)
        .map(|c| (c, x[c + r] - x[c - r]))
        .fold(None::<(usize, f64)>, |acc, (c, gap)| match acc {
            Some((_, g)) if g <= gap => acc,
            _ => Some((c, gap)),
        })
        .map(|(c, _)| c)
        .expect("window range is nonempty");
    Ok(x[best])
}
