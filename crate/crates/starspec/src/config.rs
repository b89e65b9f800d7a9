//! Serializable descriptions of graphs, operators, meshes and solver settings.

use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use starspec_core::eigensolve::SolverOptions;
use starspec_core::geometry::{broken_line, StarGraph};
use starspec_core::mesh::MeshParams;
use starspec_core::models::Problem;

use crate::error::{config_err, Error, Result};

/// Which star graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Line,
    HalfLine,
    /// Branches at `±theta`.
    BrokenLine {
        theta: f64,
    },
    /// Arbitrary branch angles, wrapped into `[0, 2π)` and sorted.
    Angles {
        angles: Vec<f64>,
    },
}

impl GraphSpec {
    pub fn graph(&self, alpha: f64) -> Result<StarGraph> {
        Ok(match self {
            GraphSpec::Line => StarGraph::line(alpha),
            GraphSpec::HalfLine => StarGraph::half_line(alpha),
            GraphSpec::BrokenLine { theta } => broken_line(*theta, alpha)?,
            GraphSpec::Angles { angles } => StarGraph::from_unsorted(angles, alpha)?,
        })
    }

    pub fn label(&self) -> String {
        match self {
            GraphSpec::Line => "line".into(),
            GraphSpec::HalfLine => "half-line".into(),
            GraphSpec::BrokenLine { theta } => format!("broken:{theta}"),
            GraphSpec::Angles { angles } => {
                let a: Vec<String> = angles.iter().map(|a| a.to_string()).collect();
                format!("angles:{}", a.join(";"))
            }
        }
    }

    pub fn degrees_to_radians(&mut self) {
        match self {
            GraphSpec::BrokenLine { theta } => *theta = theta.to_radians(),
            GraphSpec::Angles { angles } => angles.iter_mut().for_each(|a| *a = a.to_radians()),
            GraphSpec::Line | GraphSpec::HalfLine => {}
        }
    }
}

/// `line`, `half-line`, `broken:<theta>` or `angles:<a1>,<a2>,...`.
impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "line" => return Ok(GraphSpec::Line),
            "half-line" | "half_line" => return Ok(GraphSpec::HalfLine),
            _ => {}
        }
        let (head, tail) = s
            .split_once(':')
            .ok_or_else(|| config_err(format!("unknown graph {s:?}")))?;
        match head {
            "broken" | "broken-line" | "broken_line" => Ok(GraphSpec::BrokenLine {
                theta: parse_f64(tail)?,
            }),
            "angles" => Ok(GraphSpec::Angles {
                angles: parse_list(tail)?,
            }),
            _ => Err(config_err(format!("unknown graph {s:?}"))),
        }
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    let t = s.trim();
    let v = match t.to_ascii_lowercase().as_str() {
        "pi" => PI,
        "pi/2" => PI / 2.0,
        "pi/4" => PI / 4.0,
        "2pi" => TAU,
        _ => t
            .parse::<f64>()
            .map_err(|_| config_err(format!("not a number: {t:?}")))?,
    };
    if !v.is_finite() {
        return Err(config_err(format!("not a finite number: {t:?}")));
    }
    Ok(v)
}

/// Comma or semicolon separated numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split([',', ';'])
        .filter(|p| !p.trim().is_empty())
        .map(parse_f64)
        .collect()
}

/// Operator together with its geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operator", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Star {
        graph: GraphSpec,
        alpha: f64,
    },
    RobinSector {
        gamma: f64,
        theta: f64,
    },
    DeltaLine {
        gamma: f64,
        theta: f64,
    },
    HalfNeumann {
        theta: f64,
    },
    HalfDirichlet {
        theta: f64,
    },
    /// One-dimensional model on `(−half_length, half_length)` with
    /// `points` elements per side; not meshed in the plane.
    DeltaPrime1d {
        half_length: f64,
        points: usize,
    },
}

impl ProblemSpec {
    pub fn problem(&self) -> Result<Problem> {
        let p = match self {
            ProblemSpec::Star { graph, alpha } => Problem::Star(graph.graph(*alpha)?),
            ProblemSpec::RobinSector { gamma, theta } => Problem::RobinSector {
                gamma: *gamma,
                theta: *theta,
            },
            ProblemSpec::DeltaLine { gamma, theta } => Problem::DeltaLine {
                gamma: *gamma,
                theta: *theta,
            },
            ProblemSpec::HalfNeumann { theta } => Problem::HalfNeumann { theta: *theta },
            ProblemSpec::HalfDirichlet { theta } => Problem::HalfDirichlet { theta: *theta },
            ProblemSpec::DeltaPrime1d { .. } => return Err(config_err("the 1D model is not a planar problem")),
        };
        p.spec().validate()?;
        Ok(p)
    }

    pub fn degrees_to_radians(&mut self) {
        match self {
            ProblemSpec::Star { graph, .. } => graph.degrees_to_radians(),
            ProblemSpec::RobinSector { theta, .. }
            | ProblemSpec::DeltaLine { theta, .. }
            | ProblemSpec::HalfNeumann { theta }
            | ProblemSpec::HalfDirichlet { theta } => *theta = theta.to_radians(),
            ProblemSpec::DeltaPrime1d { .. } => {}
        }
    }

    pub fn label(&self) -> String {
        match self {
            ProblemSpec::Star { graph, alpha } => format!("star[{}] alpha={alpha}", graph.label()),
            ProblemSpec::RobinSector { gamma, theta } => format!("robin theta={theta} gamma={gamma}"),
            ProblemSpec::DeltaLine { gamma, theta } => format!("delta-line theta={theta} gamma={gamma}"),
            ProblemSpec::HalfNeumann { theta } => format!("half-neumann theta={theta}"),
            ProblemSpec::HalfDirichlet { theta } => format!("half-dirichlet theta={theta}"),
            ProblemSpec::DeltaPrime1d { half_length, points } => {
                format!("delta-prime-1d L={half_length} n={points}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub radius: f64,
    pub h: f64,
    #[serde(default = "unit")]
    pub grading: f64,
}

fn unit() -> f64 {
    1.0
}

impl MeshSpec {
    pub const fn new(radius: f64, h: f64, grading: f64) -> Self {
        MeshSpec { radius, h, grading }
    }

    pub fn params(&self) -> Result<MeshParams> {
        Ok(MeshParams::new(self.radius, self.h, self.grading)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolverOptions::default();
        SolverSpec {
            tol: d.tol,
            max_iter: d.max_iter,
            seed: d.seed,
        }
    }
}

impl SolverSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(config_err(format!("solver tolerance {} outside (0, 1)", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(config_err("solver needs at least one iteration"));
        }
        Ok(())
    }

    pub fn options(&self, k: usize) -> SolverOptions {
        SolverOptions {
            k,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            ..SolverOptions::default()
        }
    }
}

/// Desk-scale grids shared by the sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    /// Descending.
    pub thetas: Vec<f64>,
    /// Ascending.
    pub radii: Vec<f64>,
    /// Descending.
    pub hs: Vec<f64>,
    pub k: usize,
    pub coupling: f64,
}

impl SweepGrid {
    pub fn desk() -> Self {
        SweepGrid {
            thetas: vec![0.45, 0.30, 0.20, 0.15, 0.10],
            radii: vec![8.0, 12.0, 16.0],
            hs: vec![0.08, 0.04, 0.02],
            k: 4,
            coupling: -1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() || self.radii.is_empty() || self.hs.is_empty() {
            return Err(config_err("sweep grids must be non-empty"));
        }
        if !strictly(&self.thetas, |a, b| a > b) {
            return Err(config_err("theta grid must be strictly descending"));
        }
        if !strictly(&self.radii, |a, b| a < b) {
            return Err(config_err("radius grid must be strictly ascending"));
        }
        if !strictly(&self.hs, |a, b| a > b) {
            return Err(config_err("h grid must be strictly descending"));
        }
        if self.k == 0 {
            return Err(config_err("k must be at least 1"));
        }
        Ok(())
    }
}

pub(crate) fn strictly(v: &[f64], ord: impl Fn(f64, f64) -> bool) -> bool {
    v.windows(2).all(|w| ord(w[0], w[1]))
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < PI / 2.0) {
        return Err(config_err(format!("theta {theta} outside (0, π/2)")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_strings() {
        assert_eq!("line".parse::<GraphSpec>().unwrap(), GraphSpec::Line);
        assert_eq!(
            "broken:0.3".parse::<GraphSpec>().unwrap(),
            GraphSpec::BrokenLine { theta: 0.3 }
        );
        assert_eq!(
            "angles:0,0.4,pi".parse::<GraphSpec>().unwrap(),
            GraphSpec::Angles {
                angles: vec![0.0, 0.4, PI]
            }
        );
        assert!("circle".parse::<GraphSpec>().is_err());
    }

    #[test]
    fn problem_round_trips_through_toml() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct W {
            p: ProblemSpec,
        }
        let w = W {
            p: ProblemSpec::Star {
                graph: GraphSpec::BrokenLine { theta: 0.2 },
                alpha: -1.0,
            },
        };
        let s = toml::to_string(&w).unwrap();
        assert_eq!(toml::from_str::<W>(&s).unwrap(), w);
    }

    #[test]
    fn desk_grid_is_valid() {
        SweepGrid::desk().validate().unwrap();
    }
}
