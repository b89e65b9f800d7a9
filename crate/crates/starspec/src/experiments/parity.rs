use serde::{Deserialize, Serialize};
use starspec_core::geometry::broken_line;
use starspec_core::mesh::MeshParams;
use starspec_core::models::{ModelResult, Problem};

use super::{echo, par_map, scale, solve_fresh};
use crate::config::{check_theta, MeshSpec, SolverSpec};
use crate::error::config_err;
use crate::report::ExperimentReport;
use crate::Result;

/// Full broken-line spectrum against the union of the even and odd half
/// problems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParityConfig {
    pub thetas: Vec<f64>,
    pub mesh: MeshSpec,
    /// Eigenpairs per problem, raised automatically past the count below −4.
    pub k: usize,
    pub tol: f64,
    pub solver: SolverSpec,
}

impl Default for ParityConfig {
    fn default() -> Self {
        ParityConfig {
            thetas: vec![0.2, 0.3, 0.45],
            mesh: MeshSpec::new(8.0, 0.04, 2.0),
            k: 6,
            tol: 1e-8,
            solver: SolverSpec::default(),
        }
    }
}

impl ParityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() {
            return Err(config_err("theta grid is empty"));
        }
        self.thetas.iter().try_for_each(|&t| check_theta(t))?;
        if self.k == 0 {
            return Err(config_err("k must be at least 1"));
        }
        self.solver.validate()?;
        self.mesh.params()?;
        Ok(())
    }
}

const THRESHOLD: f64 = -4.0;

/// Solves with `k` pairs, more if needed to pass the threshold.
fn solve_past(problem: &Problem, params: &MeshParams, k: usize, cfg: &ParityConfig) -> Result<ModelResult> {
    let res = solve_fresh(problem, params, k, &cfg.solver)?;
    let count = res.count_below(THRESHOLD)?;
    if count < res.spectrum.len() {
        return Ok(res);
    }
    solve_fresh(problem, params, count + 1, &cfg.solver)
}

struct Point {
    full: Vec<f64>,
    neumann: Vec<f64>,
    dirichlet: Vec<f64>,
    dirichlet_count: usize,
}

pub fn parity_study(cfg: &ParityConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let params = cfg.mesh.params()?;
    let points = par_map(&cfg.thetas, |&theta| {
        let full = solve_past(&Problem::Star(broken_line(theta, -1.0)?), &params, cfg.k, cfg)?;
        let k = full.spectrum.len();
        let n = solve_past(&Problem::HalfNeumann { theta }, &params, k, cfg)?;
        let d = solve_past(&Problem::HalfDirichlet { theta }, &params, k, cfg)?;
        Ok(Point {
            dirichlet_count: d.count_below(THRESHOLD)?,
            full: full.spectrum.eigenvalues,
            neumann: n.spectrum.eigenvalues,
            dirichlet: d.spectrum.eigenvalues,
        })
    })?;

    let mut report = ExperimentReport::new(
        "parity",
        &[
            "theta",
            "n",
            "full",
            "merged",
            "parity",
            "difference",
            "below_threshold",
        ],
        echo(cfg),
    );
    let mut below_worst: f64 = 0.0;
    let mut list_worst: f64 = 0.0;
    let mut counts_match = true;
    let mut dirichlet_total = 0;
    for (&theta, p) in cfg.thetas.iter().zip(&points) {
        let mut merged: Vec<(f64, &str)> = p
            .neumann
            .iter()
            .map(|&e| (e, "even"))
            .chain(p.dirichlet.iter().map(|&e| (e, "odd")))
            .collect();
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        let full_below = p.full.iter().filter(|&&e| e < THRESHOLD).count();
        let merged_below = merged.iter().filter(|m| m.0 < THRESHOLD).count();
        counts_match &= full_below == merged_below;
        dirichlet_total += p.dirichlet_count;
        for (n, (&f, &(m, src))) in p.full.iter().zip(&merged).enumerate() {
            let diff = (f - m).abs() / scale(f, m);
            list_worst = list_worst.max(diff);
            if f < THRESHOLD || m < THRESHOLD {
                below_worst = below_worst.max(diff);
            }
            report.push_row(vec![
                theta.into(),
                (n + 1).into(),
                f.into(),
                m.into(),
                src.into(),
                diff.into(),
                (f < THRESHOLD).into(),
            ]);
        }
    }
    report.flag(
        "parity_below_threshold",
        counts_match && below_worst <= cfg.tol,
        below_worst,
        cfg.tol,
        "eigenvalues below −4: full problem against merged half problems, relative to max(1,|λ|)",
    );
    report.flag(
        "parity_full_list",
        list_worst <= cfg.tol,
        list_worst,
        cfg.tol,
        "every computed eigenvalue of the full problem against the merged list",
    );
    report.flag(
        "odd_part_empty_below_threshold",
        dirichlet_total == 0,
        dirichlet_total as f64,
        0.0,
        "inertia count of the Dirichlet half problem below −4, summed over angles",
    );
    Ok(report)
}
