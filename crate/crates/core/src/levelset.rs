//! Sublevel sets of sums of concave distance ratios.
//!
//! Both Edelman statistics have the form
//! `S(θ) = Σ_i φ(|X_i − θ| · w_i)` with `φ` concave, increasing and
//! unbounded on `[0, ∞)`. Between two consecutive distinct data points every
//! term is concave in `θ`, so `S` is concave there and `{S ≥ c}` is a single
//! interval inside each gap. Outside the data hull `S` is monotone and
//! diverges. This turns the set `{S < c}` into a per-gap problem with at most
//! two boundary points each, solved without a global grid.

use crate::set::{ConfidenceSet, Interval};

/// The concave profile applied to each scaled distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `φ(r) = ln(1 + r)`.
    Log1p,
    /// `φ(r) = r^{1/ρ}` with `ρ > 1`.
    Root { rho: f64 },
}

impl Profile {
    #[inline]
    fn value(self, r: f64) -> f64 {
        match self {
            Profile::Log1p => r.ln_1p(),
            Profile::Root { rho } => r.powf(1.0 / rho),
        }
    }

    /// `φ'(r)` for `r > 0`.
    #[inline]
    fn slope(self, r: f64) -> f64 {
        match self {
            Profile::Log1p => 1.0 / (1.0 + r),
            Profile::Root { rho } => r.powf(1.0 / rho - 1.0) / rho,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RatioSum {
    /// Sorted data points.
    points: Vec<f64>,
    weights: Vec<f64>,
    profile: Profile,
}

impl RatioSum {
    /// `points` and `weights` are paired; the pairs are sorted by point.
    pub fn new(points: &[f64], weights: &[f64], profile: Profile) -> Self {
        let mut pairs: Vec<(f64, f64)> = points
            .iter()
            .copied()
            .zip(weights.iter().copied())
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (points, weights) = pairs.into_iter().unzip();
        Self {
            points,
            weights,
            profile,
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| self.profile.value((x - theta).abs() * w))
            .sum()
    }

    /// Terms that are smooth on `[u, v]` (points outside the closed gap),
    /// returning `(value, derivative)` at `theta`.
    fn smooth_part(&self, theta: f64, u: f64, v: f64) -> (f64, f64) {
        let mut val = 0.0;
        let mut der = 0.0;
        for (&x, &w) in self.points.iter().zip(&self.weights) {
            if x < u {
                let r = (theta - x) * w;
                val += self.profile.value(r);
                der += self.profile.slope(r) * w;
            } else if x > v {
                let r = (x - theta) * w;
                val += self.profile.value(r);
                der -= self.profile.slope(r) * w;
            }
        }
        (val, der)
    }

    /// Upper bound of `S` on the gap `[u, v]` from tangent lines of the
    /// smooth terms plus the maxima of the terms anchored at `u` and `v`.
    fn gap_upper_bound(&self, u: f64, v: f64) -> f64 {
        let (gu, du) = self.smooth_part(u, u, v);
        let (gv, dv) = self.smooth_part(v, u, v);
        // max over θ of min(gu + du(θ−u), gv + dv(θ−v)); du ≥ dv by concavity
        let smooth = if du > dv {
            let t = ((gv - gu + du * u - dv * v) / (du - dv)).clamp(u, v);
            (gu + du * (t - u)).min(gv + dv * (t - v))
        } else {
            gu.max(gv)
        };
        let anchored: f64 = self
            .points
            .iter()
            .zip(&self.weights)
            .filter(|(&x, _)| x == u || x == v)
            .map(|(_, &w)| self.profile.value((v - u) * w))
            .sum();
        smooth + anchored
    }

    /// Largest `S` on `[u, v]` by golden-section search on the concave gap.
    fn gap_maximum(&self, u: f64, v: f64) -> (f64, f64) {
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let (mut a, mut b) = (u, v);
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = self.value(c);
        let mut fd = self.value(d);
        for _ in 0..200 {
            if b - a <= 1e-15 * (a.abs().max(b.abs()).max(1.0)) {
                break;
            }
            if fc < fd {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = self.value(d);
            } else {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = self.value(c);
            }
        }
        if fc >= fd {
            (c, fc)
        } else {
            (d, fd)
        }
    }

    /// Crossing of `S = cutoff` in `[lo, hi]` where `below(lo) != below(hi)`.
    fn crossing(&self, mut lo: f64, mut hi: f64, cutoff: f64) -> f64 {
        let lo_below = self.value(lo) < cutoff;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.value(mid) < cutoff) == lo_below {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if lo_below {
            lo
        } else {
            hi
        }
    }

    /// Closed version of `{θ : S(θ) < cutoff}`.
    pub fn sublevel_set(&self, cutoff: f64) -> ConfidenceSet {
        let mut knots: Vec<f64> = self.points.clone();
        knots.dedup();
        let vals: Vec<f64> = knots.iter().map(|&k| self.value(k)).collect();
        let below: Vec<bool> = vals.iter().map(|&s| s < cutoff).collect();
        let first = knots[0];
        let last = *knots.last().unwrap();
        let scale = (last - first).max(first.abs().max(last.abs())).max(1.0);

        let mut out = Vec::new();

        // left tail: S strictly decreasing towards the first knot
        if below[0] {
            let mut step = scale;
            let mut far = first - step;
            while self.value(far) < cutoff && step.is_finite() {
                step *= 2.0;
                far = first - step;
            }
            out.push(Interval {
                lo: self.crossing(far, first, cutoff),
                hi: first,
            });
        }

        for k in 0..knots.len().saturating_sub(1) {
            let (u, v) = (knots[k], knots[k + 1]);
            match (below[k], below[k + 1]) {
                (false, false) => {}
                (true, false) => out.push(Interval {
                    lo: u,
                    hi: self.crossing(u, v, cutoff),
                }),
                (false, true) => out.push(Interval {
                    lo: self.crossing(u, v, cutoff),
                    hi: v,
                }),
                (true, true) => {
                    if self.gap_upper_bound(u, v) < cutoff {
                        out.push(Interval { lo: u, hi: v });
                        continue;
                    }
                    let (peak, top) = self.gap_maximum(u, v);
                    if top < cutoff {
                        out.push(Interval { lo: u, hi: v });
                    } else {
                        out.push(Interval {
                            lo: u,
                            hi: self.crossing(u, peak, cutoff),
                        });
                        out.push(Interval {
                            lo: self.crossing(peak, v, cutoff),
                            hi: v,
                        });
                    }
                }
            }
        }

        // right tail
        if *below.last().unwrap() {
            let mut step = scale;
            let mut far = last + step;
            while self.value(far) < cutoff && step.is_finite() {
                step *= 2.0;
                far = last + step;
            }
            out.push(Interval {
                lo: last,
                hi: self.crossing(last, far, cutoff),
            });
        }

        // isolated knots inside the set (both neighbouring gaps excluded)
        for (k, &b) in below.iter().enumerate() {
            if b {
                out.push(Interval {
                    lo: knots[k],
                    hi: knots[k],
                });
            }
        }
        ConfidenceSet::from_intervals(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_check(sum: &RatioSum, cutoff: f64) {
        let set = sum.sublevel_set(cutoff);
        let (mut lo, mut hi) = (sum.points[0], *sum.points.last().unwrap());
        if let Some(h) = set.hull() {
            lo = lo.min(h.lo);
            hi = hi.max(h.hi);
        }
        let span = (hi - lo).max(1.0);
        let (lo, hi) = (lo - span, hi + span);
        let steps = 200_000;
        for i in 0..=steps {
            let t = lo + (hi - lo) * i as f64 / steps as f64;
            let inside = sum.value(t) < cutoff;
            assert_eq!(inside, set.contains(t), "θ = {t}, S = {}", sum.value(t));
        }
    }

    #[test]
    fn log_profile_matches_grid() {
        let pts = [0.0, 0.3, 1.0, 2.5, 2.6, 4.0];
        let w = [1.0, 2.0, 0.5, 1.5, 1.0, 0.8];
        let sum = RatioSum::new(&pts, &w, Profile::Log1p);
        for cutoff in [2.0, 4.0, 6.0, 9.0] {
            assert!(!sum.sublevel_set(cutoff + 4.0).is_empty());
            grid_check(&sum, cutoff);
        }
    }

    #[test]
    fn root_profile_matches_grid() {
        let pts = [-1.0, -0.2, 0.1, 0.15, 3.0];
        let w = [1.0, 0.3, 4.0, 1.0, 0.2];
        let sum = RatioSum::new(&pts, &w, Profile::Root { rho: 2.0 });
        for cutoff in [1.5, 2.5, 4.0] {
            grid_check(&sum, cutoff);
        }
    }

    #[test]
    fn dip_inside_a_gap() {
        // two far-apart points: S peaks between them
        let sum = RatioSum::new(&[0.0, 10.0], &[1.0, 1.0], Profile::Log1p);
        let peak = 2.0 * 5f64.ln_1p();
        let set = sum.sublevel_set(peak - 0.01);
        assert_eq!(set.len(), 2);
        let set = sum.sublevel_set(peak + 0.01);
        assert_eq!(set.len(), 1);
        assert!(set.contains(5.0));
    }
}
