//! Star graphs, the sectors between consecutive branches, and truncated
//! computational domains.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI, TAU};

use num_traits::Float;

use crate::{Error, Result};

/// Two branch angles closer than this are considered coincident.
pub const ANGLE_TOL: f64 = 1e-12;

/// Finite union of rays `{(r, θ_j) : r ≥ 0}` with a coupling strength `α`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarGraph {
    angles: Vec<f64>,
    alpha: f64,
}

impl StarGraph {
    /// Branch angles must be strictly increasing in `[0, 2π)`.
    pub fn new(angles: Vec<f64>, alpha: f64) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Geometry("a star graph needs at least one branch".into()));
        }
        if !alpha.is_finite() {
            return Err(Error::Geometry(format!("coupling {alpha} is not finite")));
        }
        for &a in &angles {
            if !a.is_finite() || !(0.0..TAU).contains(&a) {
                return Err(Error::Geometry(format!("branch angle {a} outside [0, 2π)")));
            }
        }
        for w in angles.windows(2) {
            if w[1] - w[0] <= ANGLE_TOL {
                return Err(Error::Geometry(format!(
                    "branch angles must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if angles.len() > 1 && angles[0] + TAU - angles[angles.len() - 1] <= ANGLE_TOL {
            return Err(Error::Geometry("first and last branch coincide modulo 2π".into()));
        }
        Ok(StarGraph { angles, alpha })
    }

    /// Sorts and wraps arbitrary real angles into `[0, 2π)` before validating.
    pub fn from_unsorted(angles: &[f64], alpha: f64) -> Result<Self> {
        let mut wrapped: Vec<f64> = angles.iter().map(|&a| wrap_angle(a)).collect();
        wrapped.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        StarGraph::new(wrapped, alpha)
    }

    pub fn line(alpha: f64) -> Self {
        StarGraph {
            angles: alloc::vec![0.0, PI],
            alpha,
        }
    }

    pub fn half_line(alpha: f64) -> Self {
        StarGraph {
            angles: alloc::vec![0.0],
            alpha,
        }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn branch_count(&self) -> usize {
        self.angles.len()
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        StarGraph {
            angles: self.angles.clone(),
            alpha,
        }
    }

    /// Sector `j` spans `(θ_j, θ_{j+1})` with `θ_{M+1} = 2π + θ_1`.
    pub fn sectors(&self) -> Vec<Sector> {
        let m = self.angles.len();
        (0..m)
            .map(|j| {
                let start = self.angles[j];
                let end = if j + 1 < m {
                    self.angles[j + 1]
                } else {
                    TAU + self.angles[0]
                };
                Sector {
                    start_angle: start,
                    end_angle: end,
                    half_opening: 0.5 * (end - start),
                }
            })
            .collect()
    }

    /// Copy rotated so that the first branch lies on the positive x-axis.
    pub fn rotated_to_first(&self) -> StarGraph {
        let shift = self.angles[0];
        StarGraph {
            angles: self.angles.iter().map(|&a| a - shift).collect(),
            alpha: self.alpha,
        }
    }

    /// Graph with one more branch at `angle` (any real value, wrapped).
    pub fn with_branch(&self, angle: f64) -> Result<StarGraph> {
        let mut angles = self.angles.clone();
        angles.push(angle);
        StarGraph::from_unsorted(&angles, self.alpha)
    }

    /// Indices in `self` of the branches of `sub`, if `sub ⊂ self`.
    pub fn branch_indices_of(&self, sub: &StarGraph) -> Option<Vec<usize>> {
        sub.angles
            .iter()
            .map(|&a| self.angles.iter().position(|&b| angular_distance(a, b) <= 1e-10))
            .collect()
    }

    pub fn is_line(&self) -> bool {
        self.angles.len() == 2 && (self.angles[1] - self.angles[0] - PI).abs() <= 1e-10
    }
}

/// Infinite sector between two consecutive branches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sector {
    pub start_angle: f64,
    /// May exceed `2π` for the sector that wraps past the positive x-axis.
    pub end_angle: f64,
    pub half_opening: f64,
}

impl Sector {
    /// Angle of the bisector, wrapped to `(-π, π]`.
    pub fn bisector(&self) -> f64 {
        wrap_signed(self.start_angle + self.half_opening)
    }
}

/// The two-branch graph `|y| = x tan θ`, `x ≥ 0`.
pub fn broken_line(theta: f64, alpha: f64) -> Result<StarGraph> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Geometry(format!(
            "broken line half-angle {theta} outside (0, π/2); fold it first"
        )));
    }
    StarGraph::new(alloc::vec![theta, TAU - theta], alpha)
}

/// Maps `θ ∈ (0, π)` to `min(θ, π − θ)`.
pub fn fold_angle(theta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::Geometry(format!("angle {theta} outside (0, π)")));
    }
    Ok(theta.min(PI - theta))
}

/// What gets truncated to the disk of radius `radius`.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainSource {
    Star(StarGraph),
    /// `U_θ = {|arg z| < θ}`.
    Sector {
        half_opening: f64,
    },
    /// `Ω_θ = {x < y tan θ}` with a crack on the positive y-axis.
    HalfPlane {
        theta: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedDomain {
    pub radius: f64,
    pub source: DomainSource,
}

impl TruncatedDomain {
    pub fn new(radius: f64, source: DomainSource) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Geometry(format!("truncation radius {radius} must be positive")));
        }
        Ok(TruncatedDomain { radius, source })
    }
}

pub(crate) fn wrap_angle(a: f64) -> f64 {
    let w = a - TAU * Float::floor(a / TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

pub(crate) fn wrap_signed(a: f64) -> f64 {
    let w = wrap_angle(a);
    if w > PI + ANGLE_TOL {
        w - TAU
    } else {
        w
    }
}

fn angular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_angle(a - b);
    d.min(TAU - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_4;

    #[test]
    fn line_splits_into_two_half_planes() {
        let s = StarGraph::line(-1.0).sectors();
        assert_eq!(s.len(), 2);
        for sec in &s {
            assert!((sec.half_opening - FRAC_PI_2).abs() < 1e-15);
        }
    }

    #[test]
    fn four_branches_give_quarter_planes() {
        let g = StarGraph::new(alloc::vec![0.0, FRAC_PI_2, PI, 1.5 * PI], -1.0).unwrap();
        let s = g.sectors();
        assert_eq!(s.len(), 4);
        for sec in &s {
            assert!((sec.half_opening - FRAC_PI_4).abs() < 1e-15);
        }
    }

    #[test]
    fn broken_line_angles_and_sectors() {
        let g = broken_line(FRAC_PI_4, -1.0).unwrap();
        assert!((g.angles()[0] - FRAC_PI_4).abs() < 1e-15);
        assert!((g.angles()[1] - 7.0 * FRAC_PI_4).abs() < 1e-15);
        let g = broken_line(0.1, -1.0).unwrap();
        assert_eq!(g.angles(), &[0.1, TAU - 0.1]);
        let s = g.sectors();
        assert!((s[0].half_opening - (PI - 0.1)).abs() < 1e-14);
        assert!((s[1].half_opening - 0.1).abs() < 1e-14);
        assert!(s[1].bisector().abs() < 1e-14);
        assert!((s[0].bisector() - PI).abs() < 1e-14);
    }

    #[test]
    fn broken_line_rejects_unfolded_angles() {
        assert!(broken_line(PI / 3.0 * 2.0, -1.0).is_err());
        assert!(broken_line(FRAC_PI_2, -1.0).is_err());
        assert!(broken_line(0.0, -1.0).is_err());
        // π/3 lies in (0, π/2) and is accepted as is.
        assert!(broken_line(PI / 3.0, -1.0).is_ok());
    }

    #[test]
    fn fold_examples() {
        assert!((fold_angle(2.0).unwrap() - (PI - 2.0)).abs() < 1e-15);
        assert_eq!(fold_angle(FRAC_PI_2).unwrap(), FRAC_PI_2);
        assert_eq!(fold_angle(0.3).unwrap(), 0.3);
        assert!(fold_angle(0.0).is_err());
        assert!(fold_angle(PI).is_err());
    }

    #[test]
    fn rejects_bad_angle_lists() {
        assert!(StarGraph::new(alloc::vec![], -1.0).is_err());
        assert!(StarGraph::new(alloc::vec![0.5, 0.5 + 1e-13], -1.0).is_err());
        assert!(StarGraph::new(alloc::vec![1.0, 0.5], -1.0).is_err());
        assert!(StarGraph::new(alloc::vec![0.0, TAU], -1.0).is_err());
        assert!(StarGraph::new(alloc::vec![0.0], f64::NAN).is_err());
    }

    #[test]
    fn subgraph_indices() {
        let big = StarGraph::new(alloc::vec![0.0, 0.4, PI], -1.0).unwrap();
        let line = StarGraph::line(-1.0);
        assert_eq!(big.branch_indices_of(&line), Some(alloc::vec![0, 2]));
        let other = broken_line(0.3, -1.0).unwrap();
        assert_eq!(big.branch_indices_of(&other), None);
    }
}
