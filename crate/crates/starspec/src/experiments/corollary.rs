use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use starspec_core::assembly::{assemble, AssemblyOptions};
use starspec_core::eigensolve::count_below;
use starspec_core::geometry::{broken_line, StarGraph};
use starspec_core::mesh::{build_star_mesh, MeshParams};
use starspec_core::models::Problem;

use super::{echo, for_coupling, scale, solve_with};
use crate::config::{check_theta, strictly, SolverSpec};
use crate::error::config_err;
use crate::report::{Cell, ExperimentReport};
use crate::Result;

/// Finds a broken line with at least `n` eigenvalues below the threshold and
/// adds `branches − 2` further branches inside the wide sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorollaryConfig {
    pub branches: usize,
    pub n: usize,
    pub alpha: f64,
    /// Candidate angles, strictly descending; the first one that works wins.
    pub thetas: Vec<f64>,
    pub radius: f64,
    pub h_ref: f64,
    pub theta_ref: f64,
    pub grading: f64,
    pub tol: f64,
    pub solver: SolverSpec,
}

impl Default for CorollaryConfig {
    fn default() -> Self {
        CorollaryConfig {
            branches: 3,
            n: 2,
            alpha: -1.0,
            thetas: vec![0.45, 0.30, 0.20, 0.15, 0.10, 0.07, 0.05],
            radius: 8.0,
            h_ref: 0.04,
            theta_ref: 0.3,
            grading: 2.0,
            tol: 1e-8,
            solver: SolverSpec::default(),
        }
    }
}

impl CorollaryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.branches < 2 || self.n == 0 {
            return Err(config_err("need at least 2 branches and n >= 1"));
        }
        if !(self.alpha < 0.0 && self.alpha.is_finite()) {
            return Err(config_err("alpha must be negative"));
        }
        if self.thetas.is_empty() || !strictly(&self.thetas, |a, b| a > b) {
            return Err(config_err("theta candidates must be strictly descending"));
        }
        self.thetas.iter().try_for_each(|&t| check_theta(t))?;
        self.solver.validate()?;
        for &t in &self.thetas {
            self.params(t)?;
        }
        Ok(())
    }

    fn params(&self, theta: f64) -> Result<MeshParams> {
        let h = self.h_ref * (theta / self.theta_ref).min(1.0);
        Ok(for_coupling(MeshParams::new(self.radius, h, self.grading)?, self.alpha))
    }
}

/// Broken line at `±θ` plus `extra` branches spread evenly over the wide
/// sector.
pub fn enlarged_graph(theta: f64, extra: usize, alpha: f64) -> Result<StarGraph> {
    let mut g = broken_line(theta, alpha)?;
    let step = (2.0 * PI - 2.0 * theta) / (extra + 1) as f64;
    for j in 1..=extra {
        g = g.with_branch(theta + step * j as f64)?;
    }
    Ok(g)
}

pub fn corollary_many_eigenvalues(cfg: &CorollaryConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let threshold = -4.0 * cfg.alpha * cfg.alpha;
    let mut report = ExperimentReport::new(
        "corollary",
        &[
            "stage",
            "theta",
            "branches",
            "count_below",
            "n",
            "eigenvalue",
            "without_extra",
        ],
        echo(cfg),
    );
    let mut found = None;
    for &theta in &cfg.thetas {
        let graph = broken_line(theta, cfg.alpha)?;
        let mesh = build_star_mesh(&graph, &cfg.params(theta)?)?;
        let sys = assemble(&mesh, Problem::Star(graph).spec())?;
        let c = count_below(&sys.a, &sys.m, threshold)?;
        report.push_row(vec![
            "search".into(),
            theta.into(),
            2usize.into(),
            c.into(),
            Cell::Empty,
            Cell::Empty,
            Cell::Empty,
        ]);
        if c >= cfg.n {
            found = Some(theta);
            break;
        }
    }
    report.set("theta_n", found);
    let Some(theta) = found else {
        report.flag(
            "theta_found",
            false,
            f64::NAN,
            cfg.n as f64,
            "no candidate angle produced the requested count",
        );
        return Ok(report);
    };
    report.flag(
        "theta_found",
        true,
        theta,
        cfg.n as f64,
        "largest candidate angle with the requested count",
    );

    let params = cfg.params(theta)?;
    let big = enlarged_graph(theta, cfg.branches - 2, cfg.alpha)?;
    let extra: Vec<usize> = (0..big.branch_count())
        .filter(|&i| {
            let a = big.angles()[i];
            (a - theta).abs() > 1e-12 && (a - (2.0 * PI - theta)).abs() > 1e-12
        })
        .collect();
    let mesh = build_star_mesh(&big, &params)?;
    let t_big = solve_with(
        &Problem::Star(big.clone()),
        mesh.clone(),
        &params,
        cfg.n,
        &cfg.solver,
        AssemblyOptions::default(),
    )?;
    let t_sub = solve_with(
        &Problem::Star(broken_line(theta, cfg.alpha)?),
        mesh,
        &params,
        cfg.n,
        &cfg.solver,
        AssemblyOptions {
            inactive_branches: extra,
            ..AssemblyOptions::default()
        },
    )?;
    let count = t_big.count_below(threshold)?;
    let mut margin = f64::INFINITY;
    for n in 0..cfg.n {
        let (b, s) = (t_big.spectrum.eigenvalues[n], t_sub.spectrum.eigenvalues[n]);
        margin = margin.min((s - b) / scale(b, s));
        report.push_row(vec![
            "enlarged".into(),
            theta.into(),
            big.branch_count().into(),
            count.into(),
            (n + 1).into(),
            b.into(),
            s.into(),
        ]);
    }
    report.set("enlarged_angles", big.angles());
    report.flag(
        "count_at_least_n",
        count >= cfg.n,
        count as f64,
        cfg.n as f64,
        "inertia count below the threshold for the enlarged graph",
    );
    report.flag(
        "extra_branches_lower_eigenvalues",
        margin >= -cfg.tol,
        margin,
        cfg.tol,
        "smallest relative margin of Λ_k(enlarged) <= Λ_k(broken line) on the shared mesh",
    );
    Ok(report)
}
