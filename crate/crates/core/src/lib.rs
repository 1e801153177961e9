//! Finite-sample valid confidence sets for the mode of a unimodal
//! distribution.
//!
//! | method | module | idea |
//! |---|---|---|
//! | M1 | [`spacings`] | multiscale search over short order-statistic spacings |
//! | M2 / M2' | [`mest`] | level sets of a window-count M-estimation criterion |
//! | M3 / M3' | [`edelman`] | combined single-observation p-values |
//! | M4 | [`multivariate`] | radial lift of any of the above to `R^d` |
//!
//! [`method::confidence_set`] dispatches over the univariate methods and
//! [`sim`] runs coverage studies on the `f_β` test family.

pub mod edelman;
pub mod error;
pub mod levelset;
pub mod mest;
pub mod method;
pub mod multivariate;
pub mod numerics;
pub mod sample;
pub mod set;
pub mod sim;
pub mod spacings;

pub use error::{ModeError, Result};
pub use mest::{Bandwidth, MEstConfig, MEstOutcome};
pub use method::{confidence_set, confidence_set_with_plan, Estimate, Method, MethodConfig};
pub use multivariate::{
    contains_mode_candidate, scan_region, GridSpec, MembershipGrid, PointCloud,
};
pub use numerics::{Probability, RngStream};
pub use sample::{SortedSample, SplitConfig};
pub use set::{ConfidenceSet, Interval, SetReport};
pub use sim::{CoverageReport, FBetaDensity, StudyConfig};
pub use spacings::SpacingsPlan;
