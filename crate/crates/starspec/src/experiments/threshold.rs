use serde::{Deserialize, Serialize};
use starspec_core::models::Problem;

use super::{echo, par_map, solve_fresh};
use crate::config::{strictly, GraphSpec, MeshSpec, SolverSpec};
use crate::error::config_err;
use crate::report::ExperimentReport;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub graph: GraphSpec,
    pub alpha: f64,
    pub radii: Vec<f64>,
    pub h: f64,
    pub grading: f64,
    /// Eigenpairs per radius; must exceed the cluster size.
    pub k: usize,
    pub solver: SolverSpec,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            graph: GraphSpec::BrokenLine { theta: 0.2 },
            alpha: -1.0,
            radii: vec![8.0, 12.0, 16.0],
            h: 0.04,
            grading: 2.0,
            k: 10,
            solver: SolverSpec::default(),
        }
    }
}

impl ThresholdConfig {
    pub fn validate(&self) -> Result<()> {
        self.graph.graph(self.alpha)?;
        self.solver.validate()?;
        if self.radii.len() < 2 || !strictly(&self.radii, |a, b| a < b) {
            return Err(config_err("need at least two strictly ascending radii"));
        }
        if self.k < 2 {
            return Err(config_err("k must be at least 2"));
        }
        for &r in &self.radii {
            MeshSpec::new(r, self.h, self.grading).params()?;
        }
        Ok(())
    }
}

struct Point {
    radius: f64,
    dofs: usize,
    count: usize,
    eigenvalues: Vec<f64>,
}

pub fn threshold_study(cfg: &ThresholdConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let graph = cfg.graph.graph(cfg.alpha)?;
    let threshold = -4.0 * cfg.alpha.min(0.0).powi(2);
    let problem = Problem::Star(graph);
    let points = par_map(&cfg.radii, |&r| {
        let params = MeshSpec::new(r, cfg.h, cfg.grading).params()?;
        let res = solve_fresh(&problem, &params, cfg.k, &cfg.solver)?;
        Ok(Point {
            radius: r,
            dofs: res.dof_count(),
            count: res.count_below(threshold)?,
            eigenvalues: res.spectrum.eigenvalues,
        })
    })?;

    let mut report = ExperimentReport::new(
        "threshold",
        &["R", "dofs", "count_below", "n", "eigenvalue", "below_threshold"],
        echo(cfg),
    );
    report.set("threshold", threshold);
    report.set("graph", cfg.graph.label());
    let mut resolved = true;
    let mut consistent = true;
    let mut gaps = Vec::new();
    let mut spacings = Vec::new();
    for p in &points {
        for (n, &lam) in p.eigenvalues.iter().enumerate() {
            report.push_row(vec![
                p.radius.into(),
                p.dofs.into(),
                p.count.into(),
                (n + 1).into(),
                lam.into(),
                (lam < threshold).into(),
            ]);
        }
        resolved &= p.count < p.eigenvalues.len();
        let listed = p.eigenvalues.iter().filter(|&&l| l < threshold).count();
        consistent &= listed == p.count.min(p.eigenvalues.len());
        let above: Vec<f64> = p.eigenvalues.iter().copied().filter(|&l| l >= threshold).collect();
        gaps.push(above.first().map_or(f64::NAN, |l| l - threshold));
        spacings.push(if above.len() >= 2 {
            (above[above.len() - 1] - above[0]) / (above.len() - 1) as f64
        } else {
            f64::NAN
        });
    }
    let counts: Vec<usize> = points.iter().map(|p| p.count).collect();
    report.set("counts", &counts);
    report.set("first_gap_above", &gaps);
    report.set("mean_spacing_above", &spacings);
    let m = counts.len();
    let diff = counts[m - 1].abs_diff(counts[m - 2]);
    report.flag(
        "count_stable",
        diff == 0,
        diff as f64,
        0.0,
        "inertia count below the threshold on the two largest radii",
    );
    report.flag(
        "cluster_resolved",
        resolved,
        counts.iter().copied().max().unwrap_or(0) as f64,
        cfg.k as f64,
        "every radius has an eigenvalue at or above the threshold within the k computed",
    );
    report.flag(
        "inertia_matches_solver",
        consistent,
        if consistent { 0.0 } else { 1.0 },
        0.0,
        "eigenvalues listed below the threshold equal the inertia count",
    );
    let growth = |v: &[f64]| {
        v.windows(2)
            .map(|w| {
                if w[0].is_nan() || w[1].is_nan() {
                    f64::INFINITY
                } else {
                    w[1] - w[0]
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (g, s) = (growth(&gaps), growth(&spacings));
    report.flag(
        "densifies_above_threshold",
        g <= 1e-12 && s <= 1e-12,
        g.max(s),
        1e-12,
        "distance from threshold to the next eigenvalue and spacing above it do not grow with R",
    );
    Ok(report)
}
