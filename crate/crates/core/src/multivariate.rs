//! Mode confidence sets for γ-unimodal distributions on `R^d` (method M4).
//!
//! If `X` is γ-unimodal about `θ₀` then `‖X − θ₀‖₂^γ` is unimodal about 0 on
//! the line. A point `θ` is kept when 0 lies in the univariate confidence set
//! built from `{‖X_i − θ‖₂^γ}`. The d-dimensional set is represented by its
//! membership on a grid of cell centres.

use rayon::prelude::*;

use crate::error::{ModeError, Result};
use crate::method::Method;
use crate::method::{confidence_set_with_plan, MethodConfig};
use crate::spacings::SpacingsPlan;

/// Maximum number of grid cells accepted by [`scan_region`].
pub const MAX_CELLS: usize = 10_000_000;

/// `n × d` points stored row-major, with the unimodality index `γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
    gamma: f64,
}

impl PointCloud {
    pub fn new(rows: Vec<Vec<f64>>, gamma: f64) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || dim == 0 {
            return Err(ModeError::InvalidData("point cloud is empty".into()));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(ModeError::InvalidData(format!(
                "row {} has {} coordinates, expected {dim}",
                i + 1,
                rows[i].len()
            )));
        }
        let coords: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(coords, dim, gamma)
    }

    pub fn from_flat(coords: Vec<f64>, dim: usize, gamma: f64) -> Result<Self> {
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(ModeError::InvalidData(format!(
                "{} coordinates do not form rows of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(ModeError::InvalidData(
                "point cloud has non-finite coordinates".into(),
            ));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(ModeError::InvalidParameter(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        Ok(Self { coords, dim, gamma })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Per-dimension `[min, max]` of the points.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for row in self.rows() {
            for (k, &c) in row.iter().enumerate() {
                b[k].0 = b[k].0.min(c);
                b[k].1 = b[k].1.max(c);
            }
        }
        b
    }
}

/// `{‖X_i − θ‖₂^γ}` in input order.
pub fn radial_transform(cloud: &PointCloud, theta: &[f64]) -> Result<Vec<f64>> {
    if theta.len() != cloud.dim {
        return Err(ModeError::InvalidParameter(format!(
            "theta has dimension {}, cloud has {}",
            theta.len(),
            cloud.dim
        )));
    }
    let g = cloud.gamma;
    Ok(cloud
        .rows()
        .map(|row| {
            let sq: f64 = row.iter().zip(theta).map(|(a, b)| (a - b) * (a - b)).sum();
            if g == 2.0 {
                sq
            } else {
                sq.sqrt().powf(g)
            }
        })
        .collect())
}

/// True iff 0 belongs to the univariate set built on the radial transform
/// around `theta`.
pub fn contains_mode_candidate(
    cloud: &PointCloud,
    theta: &[f64],
    cfg: &MethodConfig,
) -> Result<bool> {
    let plan = match cfg.method {
        Method::M1 => Some(SpacingsPlan::new(cloud.len(), cfg.alpha)?),
        _ => None,
    };
    candidate_with_plan(cloud, theta, cfg, plan.as_ref())
}

fn candidate_with_plan(
    cloud: &PointCloud,
    theta: &[f64],
    cfg: &MethodConfig,
    plan: Option<&SpacingsPlan>,
) -> Result<bool> {
    let y = radial_transform(cloud, theta)?;
    let est = confidence_set_with_plan(&y, cfg, plan)?;
    Ok(est.set.contains(0.0))
}

/// Axis-aligned scan box with a cell count per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub bounds: Vec<(f64, f64)>,
    pub resolution: Vec<usize>,
}

impl GridSpec {
    pub fn cells(&self) -> usize {
        self.resolution.iter().product()
    }

    /// Centre of the cell with multi-index `idx` (first dimension slowest).
    pub fn center(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.bounds)
            .zip(&self.resolution)
            .map(|((&i, &(lo, hi)), &r)| lo + (i as f64 + 0.5) * (hi - lo) / r as f64)
            .collect()
    }

    /// Multi-index of the `flat`-th cell, row-major.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.resolution.len()];
        for k in (0..self.resolution.len()).rev() {
            idx[k] = flat % self.resolution[k];
            flat /= self.resolution[k];
        }
        idx
    }
}

/// Membership of each cell centre, row-major over `grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipGrid {
    pub grid: GridSpec,
    pub mask: Vec<bool>,
}

impl MembershipGrid {
    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// `(centre, in_set)` for every cell in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (Vec<f64>, bool)> + '_ {
        self.mask
            .iter()
            .enumerate()
            .map(|(i, &m)| (self.grid.center(&self.grid.unflatten(i)), m))
    }

    /// Bounding box of the member cell centres.
    pub fn member_hull(&self) -> Option<Vec<(f64, f64)>> {
        let mut hull: Option<Vec<(f64, f64)>> = None;
        for (c, m) in self.cells() {
            if !m {
                continue;
            }
            let h = hull.get_or_insert_with(|| c.iter().map(|&x| (x, x)).collect());
            for (b, x) in h.iter_mut().zip(&c) {
                b.0 = b.0.min(*x);
                b.1 = b.1.max(*x);
            }
        }
        hull
    }
}

/// Evaluates [`contains_mode_candidate`] at every cell centre.
pub fn scan_region(
    cloud: &PointCloud,
    grid: &GridSpec,
    cfg: &MethodConfig,
) -> Result<MembershipGrid> {
    let d = cloud.dim;
    if !(1..=3).contains(&d) {
        return Err(ModeError::InvalidParameter(format!(
            "grid scans support 1 to 3 dimensions, got {d}"
        )));
    }
    if grid.bounds.len() != d || grid.resolution.len() != d {
        return Err(ModeError::InvalidParameter(
            "grid dimension does not match the point cloud".into(),
        ));
    }
    if grid.resolution.contains(&0) {
        return Err(ModeError::InvalidParameter(
            "grid resolution must be positive".into(),
        ));
    }
    if grid
        .bounds
        .iter()
        .any(|&(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi))
    {
        return Err(ModeError::InvalidParameter(
            "grid bounds must be finite with lo ≤ hi".into(),
        ));
    }
    let cells = grid
        .resolution
        .iter()
        .try_fold(1usize, |acc, &r| acc.checked_mul(r))
        .filter(|&c| c <= MAX_CELLS)
        .ok_or_else(|| ModeError::InvalidParameter(format!("grid exceeds {MAX_CELLS} cells")))?;
    let plan = match cfg.method {
        Method::M1 => Some(SpacingsPlan::new(cloud.len(), cfg.alpha)?),
        _ => None,
    };
    let mask = (0..cells)
        .into_par_iter()
        .map(|i| candidate_with_plan(cloud, &grid.center(&grid.unflatten(i)), cfg, plan.as_ref()))
        .collect::<Result<Vec<bool>>>()?;
    Ok(MembershipGrid {
        grid: grid.clone(),
        mask,
    })
}
