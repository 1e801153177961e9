//! Uniform entry point over the univariate methods.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::edelman::{m3_confidence_set, m3prime_confidence_set, DEFAULT_RHO};
use crate::error::{ModeError, Result};
use crate::mest::{m2_adaptive_confidence_set, m2_confidence_set, Bandwidth, MEstConfig};
use crate::numerics::Probability;
use crate::sample::{SortedSample, SplitConfig};
use crate::set::ConfidenceSet;
use crate::spacings::{m1_confidence_interval, m1_with_plan, SpacingsPlan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    M1,
    M2,
    M2a,
    M3,
    M3p,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::M1, Method::M2, Method::M2a, Method::M3, Method::M3p];

    pub fn name(self) -> &'static str {
        match self {
            Method::M1 => "m1",
            Method::M2 => "m2",
            Method::M2a => "m2a",
            Method::M3 => "m3",
            Method::M3p => "m3p",
        }
    }

    /// Whether the method splits the sample and needs a pilot.
    pub fn splits(self) -> bool {
        !matches!(self, Method::M1)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ModeError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "m1" => Ok(Method::M1),
            "m2" => Ok(Method::M2),
            "m2a" | "m2'" | "m2p" => Ok(Method::M2a),
            "m3" => Ok(Method::M3),
            "m3p" | "m3'" => Ok(Method::M3p),
            other => Err(ModeError::InvalidParameter(format!(
                "unknown method '{other}' (expected m1, m2, m2a, m3 or m3p)"
            ))),
        }
    }
}

/// Everything needed to run one method on a univariate sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub alpha: Probability,
    /// M2 uses `Fixed`; M2' uses `Grid` or `Auto`.
    pub bandwidth: Bandwidth,
    pub rho: f64,
    pub split: SplitConfig,
}

impl MethodConfig {
    pub fn new(method: Method, alpha: Probability) -> Self {
        Self {
            method,
            alpha,
            bandwidth: Bandwidth::Auto {
                size: crate::mest::DEFAULT_GRID_SIZE,
            },
            rho: DEFAULT_RHO,
            split: SplitConfig::default(),
        }
    }

    pub fn with_bandwidth(mut self, bandwidth: Bandwidth) -> Self {
        self.bandwidth = bandwidth;
        self
    }

    pub fn with_split(mut self, split: SplitConfig) -> Self {
        self.split = split;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    fn mest(&self) -> MEstConfig {
        MEstConfig {
            alpha: self.alpha,
            bandwidth: self.bandwidth.clone(),
            split: self.split,
        }
    }
}

/// A confidence set plus diagnostics common to all methods.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub set: ConfidenceSet,
    /// Set only for M2/M2' when the count condition excluded nothing.
    pub vacuous: bool,
    pub pilot: Option<f64>,
    pub bandwidth: Option<f64>,
}

impl Estimate {
    fn plain(set: ConfidenceSet) -> Self {
        Self {
            set,
            vacuous: false,
            pilot: None,
            bandwidth: None,
        }
    }
}

/// Runs the configured method on `data` (any order).
pub fn confidence_set(data: &[f64], cfg: &MethodConfig) -> Result<Estimate> {
    confidence_set_with_plan(data, cfg, None)
}

/// As [`confidence_set`], reusing an M1 plan built for `data.len()`.
pub fn confidence_set_with_plan(
    data: &[f64],
    cfg: &MethodConfig,
    plan: Option<&SpacingsPlan>,
) -> Result<Estimate> {
    match cfg.method {
        Method::M1 => {
            let sample = SortedSample::from_slice(data)?;
            let set = match plan {
                Some(p) => m1_with_plan(&sample, p)?,
                None => m1_confidence_interval(&sample, cfg.alpha)?,
            };
            Ok(Estimate::plain(set))
        }
        Method::M2 | Method::M2a => {
            check_finite(data)?;
            let out = if cfg.method == Method::M2 {
                m2_confidence_set(data, &cfg.mest())?
            } else {
                m2_adaptive_confidence_set(data, &cfg.mest())?
            };
            Ok(Estimate {
                set: out.set,
                vacuous: out.vacuous,
                pilot: Some(out.pilot),
                bandwidth: Some(out.h),
            })
        }
        Method::M3 => {
            check_finite(data)?;
            let out = m3_confidence_set(data, cfg.alpha, &cfg.split)?;
            Ok(Estimate {
                pilot: Some(out.pilot),
                ..Estimate::plain(out.set)
            })
        }
        Method::M3p => {
            check_finite(data)?;
            let out = m3prime_confidence_set(data, cfg.alpha, cfg.rho, &cfg.split)?;
            Ok(Estimate {
                pilot: Some(out.pilot),
                ..Estimate::plain(out.set)
            })
        }
    }
}

fn check_finite(data: &[f64]) -> Result<()> {
    match data.iter().find(|v| !v.is_finite()) {
        Some(bad) => Err(ModeError::InvalidData(format!(
            "sample contains a non-finite value ({bad})"
        ))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("m9".parse::<Method>().is_err());
    }

    #[test]
    fn non_finite_rejected_everywhere() {
        let mut data: Vec<f64> = (0..100).map(|i| i as f64).collect();
        data[3] = f64::NAN;
        let alpha = Probability::level(0.05).unwrap();
        for m in Method::ALL {
            let cfg = MethodConfig::new(m, alpha).with_bandwidth(Bandwidth::Fixed(1.0));
            let cfg = if m == Method::M2a {
                cfg.with_bandwidth(Bandwidth::Auto { size: 4 })
            } else {
                cfg
            };
            assert!(matches!(
                confidence_set(&data, &cfg),
                Err(ModeError::InvalidData(_))
            ));
        }
    }
}
