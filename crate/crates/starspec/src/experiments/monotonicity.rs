use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use starspec_core::assembly::AssemblyOptions;
use starspec_core::geometry::{broken_line, StarGraph};
use starspec_core::mesh::refine;
use starspec_core::models::{scale_check, Problem};

use super::{echo, for_coupling, par_map, scale, solve_fresh, solve_with};
use crate::config::{check_theta, strictly, MeshSpec, SolverSpec};
use crate::error::config_err;
use crate::report::ExperimentReport;
use crate::Result;

/// `E_n(θ)` on a grid, with error bars from one red refinement, the fold
/// `θ ↦ π − θ`, and a coupling rescale at every point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonotonicityConfig {
    /// Strictly ascending, inside `(0, π/2)`.
    pub thetas: Vec<f64>,
    pub alpha: f64,
    /// For `|α| = 1`; rescaled otherwise.
    pub mesh: MeshSpec,
    pub n: usize,
    pub fold_tol: f64,
    /// Second coupling for the scale check, `None` to skip.
    pub scale_alpha: Option<f64>,
    pub scale_tol: f64,
    pub solver: SolverSpec,
}

impl Default for MonotonicityConfig {
    fn default() -> Self {
        MonotonicityConfig {
            thetas: vec![0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45],
            alpha: -1.0,
            mesh: MeshSpec::new(8.0, 0.04, 2.0),
            n: 1,
            fold_tol: 1e-8,
            scale_alpha: Some(-2.0),
            scale_tol: 1e-9,
            solver: SolverSpec::default(),
        }
    }
}

impl MonotonicityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thetas.len() < 2 || !strictly(&self.thetas, |a, b| a < b) {
            return Err(config_err("theta grid needs at least two strictly ascending values"));
        }
        self.thetas.iter().try_for_each(|&t| check_theta(t))?;
        if !(self.alpha < 0.0 && self.alpha.is_finite()) {
            return Err(config_err("monotonicity needs an attractive coupling alpha < 0"));
        }
        if let Some(a) = self.scale_alpha {
            if !(a < 0.0 && a.is_finite()) {
                return Err(config_err("scale_alpha must be negative"));
            }
        }
        if self.n == 0 {
            return Err(config_err("n must be at least 1"));
        }
        self.solver.validate()?;
        self.mesh.params()?;
        Ok(())
    }
}

struct Point {
    coarse: Vec<f64>,
    fine: Vec<f64>,
    folded: Vec<f64>,
    scale_error: Option<f64>,
}

pub fn monotonicity_study(cfg: &MonotonicityConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let params = for_coupling(cfg.mesh.params()?, cfg.alpha);
    let points = par_map(&cfg.thetas, |&theta| {
        let problem = Problem::Star(broken_line(theta, cfg.alpha)?);
        let base = solve_fresh(&problem, &params, cfg.n, &cfg.solver)?;
        let fine_mesh = refine(&base.mesh)?;
        let fine = solve_with(
            &problem,
            fine_mesh,
            &params,
            cfg.n,
            &cfg.solver,
            AssemblyOptions::default(),
        )?;
        let folded_graph = StarGraph::new(vec![PI - theta, PI + theta], cfg.alpha)?;
        let folded = solve_fresh(&Problem::Star(folded_graph), &params, cfg.n, &cfg.solver)?;
        let scale_error = match cfg.scale_alpha {
            Some(a2) => Some(scale_check(&base, a2 / cfg.alpha)?.max_rel_error),
            None => None,
        };
        Ok(Point {
            coarse: base.spectrum.eigenvalues,
            fine: fine.spectrum.eigenvalues,
            folded: folded.spectrum.eigenvalues,
            scale_error,
        })
    })?;

    let mut report = ExperimentReport::new(
        "monotonicity",
        &[
            "theta",
            "n",
            "eigenvalue",
            "coarse",
            "error_bar",
            "folded",
            "fold_difference",
            "scale_rel_error",
        ],
        echo(cfg),
    );
    let mut fold_worst: f64 = 0.0;
    let mut scale_worst: f64 = 0.0;
    for (&theta, p) in cfg.thetas.iter().zip(&points) {
        for n in 0..cfg.n {
            let fold = (p.coarse[n] - p.folded[n]).abs() / scale(p.coarse[n], 0.0);
            fold_worst = fold_worst.max(fold);
            report.push_row(vec![
                theta.into(),
                (n + 1).into(),
                p.fine[n].into(),
                p.coarse[n].into(),
                (p.coarse[n] - p.fine[n]).abs().into(),
                p.folded[n].into(),
                fold.into(),
                p.scale_error.into(),
            ]);
        }
        if let Some(e) = p.scale_error {
            scale_worst = scale_worst.max(e);
        }
    }
    for n in 0..cfg.n {
        let mut margin = f64::INFINITY;
        let mut modulus: f64 = 0.0;
        for (i, w) in points.windows(2).enumerate() {
            let bars = (w[0].coarse[n] - w[0].fine[n]).abs() + (w[1].coarse[n] - w[1].fine[n]).abs();
            let gap = w[1].fine[n] - w[0].fine[n];
            margin = margin.min(gap - bars);
            modulus = modulus.max(gap.abs() / (cfg.thetas[i + 1] - cfg.thetas[i]));
        }
        report.flag(
            &format!("strictly_increasing_E{}", n + 1),
            margin > 0.0,
            margin,
            0.0,
            "smallest gap between neighbouring grid points minus their combined error bars",
        );
        report.set(&format!("continuity_modulus_E{}", n + 1), modulus);
    }
    report.flag(
        "fold_symmetry",
        fold_worst <= cfg.fold_tol,
        fold_worst,
        cfg.fold_tol,
        "E_n(θ) against E_n(π − θ) relative to max(1,|E|)",
    );
    if cfg.scale_alpha.is_some() {
        report.flag(
            "coupling_scaling",
            scale_worst <= cfg.scale_tol,
            scale_worst,
            cfg.scale_tol,
            "relative error of the rescaled spectrum",
        );
    }
    Ok(report)
}
