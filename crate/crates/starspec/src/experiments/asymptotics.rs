use serde::{Deserialize, Serialize};
use starspec_core::geometry::broken_line;
use starspec_core::mesh::MeshParams;
use starspec_core::models::Problem;

use super::{echo, for_coupling, par_map, solve_fresh};
use crate::config::{check_theta, SolverSpec};
use crate::error::config_err;
use crate::fit::{inverse_square_basis, least_squares};
use crate::report::{ExperimentReport, Fit};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Full,
    Reduced,
}

/// Small-angle sweep of the broken line with a fit of
/// `E_n(θ) = A/θ² + B/θ + C`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AsymptoticsConfig {
    pub thetas: Vec<f64>,
    pub alpha: f64,
    pub radius: f64,
    /// Edge length at `theta_ref`; proportionally smaller below it.
    pub h_ref: f64,
    pub theta_ref: f64,
    pub grading: f64,
    pub n_max: usize,
    /// Relative tolerance on the leading coefficient, per `n` (the last
    /// entry is reused).
    pub tolerances: Vec<f64>,
    pub solver: SolverSpec,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        AsymptoticsConfig::preset(Preset::Full)
    }
}

impl AsymptoticsConfig {
    pub fn preset(p: Preset) -> Self {
        let (radius, h_ref, tolerances) = match p {
            Preset::Full => (8.0, 0.02, vec![0.15, 0.20]),
            Preset::Reduced => (6.0, 0.08, vec![0.25]),
        };
        AsymptoticsConfig {
            thetas: vec![0.30, 0.20, 0.15, 0.10],
            alpha: -1.0,
            radius,
            h_ref,
            theta_ref: 0.3,
            grading: 2.0,
            n_max: 2,
            tolerances,
            solver: SolverSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() {
            return Err(config_err("theta grid is empty"));
        }
        self.thetas.iter().try_for_each(|&t| check_theta(t))?;
        if !(self.alpha < 0.0 && self.alpha.is_finite()) {
            return Err(config_err("the small-angle law needs alpha < 0"));
        }
        if self.n_max == 0 || self.tolerances.is_empty() {
            return Err(config_err("need n_max >= 1 and at least one tolerance"));
        }
        if !(self.theta_ref > 0.0) {
            return Err(config_err("theta_ref must be positive"));
        }
        self.solver.validate()?;
        for &t in &self.thetas {
            self.params(t)?;
        }
        Ok(())
    }

    pub fn h_at(&self, theta: f64) -> f64 {
        self.h_ref * (theta / self.theta_ref).min(1.0)
    }

    fn params(&self, theta: f64) -> Result<MeshParams> {
        let p = MeshParams::new(self.radius, self.h_at(theta), self.grading)?;
        Ok(for_coupling(p, self.alpha))
    }

    fn tolerance(&self, n: usize) -> f64 {
        self.tolerances[n.min(self.tolerances.len() - 1)]
    }
}

struct Point {
    dofs: usize,
    count: usize,
    eigenvalues: Vec<f64>,
}

pub fn asymptotics_study(cfg: &AsymptoticsConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut thetas = cfg.thetas.clone();
    thetas.sort_by(|a, b| b.total_cmp(a));
    thetas.dedup();
    let threshold = -4.0 * cfg.alpha * cfg.alpha;
    let points = par_map(&thetas, |&theta| {
        let problem = Problem::Star(broken_line(theta, cfg.alpha)?);
        let res = solve_fresh(&problem, &cfg.params(theta)?, cfg.n_max, &cfg.solver)?;
        Ok(Point {
            dofs: res.dof_count(),
            count: res.count_below(threshold)?,
            eigenvalues: res.spectrum.eigenvalues,
        })
    })?;

    let mut report = ExperimentReport::new(
        "asymptotics",
        &["theta", "h", "dofs", "count_below", "n", "eigenvalue", "resolved"],
        echo(cfg),
    );
    for (&theta, p) in thetas.iter().zip(&points) {
        for (n, &e) in p.eigenvalues.iter().enumerate() {
            report.push_row(vec![
                theta.into(),
                cfg.h_at(theta).into(),
                p.dofs.into(),
                p.count.into(),
                (n + 1).into(),
                e.into(),
                (e < threshold && n < p.count).into(),
            ]);
        }
    }

    for n in 0..cfg.n_max {
        let (rows, ys): (Vec<_>, Vec<_>) = thetas
            .iter()
            .zip(&points)
            .filter(|(_, p)| n < p.count && p.eigenvalues[n] < threshold)
            .map(|(&t, p)| (inverse_square_basis(t), p.eigenvalues[n]))
            .unzip();
        let target = -cfg.alpha * cfg.alpha / ((2 * n + 1) as f64).powi(2);
        let tol = cfg.tolerance(n);
        let name = format!("leading_coefficient_E{}", n + 1);
        match least_squares(&rows, &ys) {
            Some(fit) => {
                let a = fit.coefficients[0];
                let rel = (a - target).abs() / target.abs();
                report.fits.push(Fit {
                    name: format!("E{}", n + 1),
                    basis: vec!["1/theta^2".into(), "1/theta".into(), "1".into()],
                    coefficients: fit.coefficients.clone(),
                    deltas: fit.std_errors.clone(),
                    points: ys.len(),
                });
                report.set(&format!("target_E{}", n + 1), target);
                report.flag(
                    &name,
                    rel <= tol,
                    rel,
                    tol,
                    format!("relative error of A against {target}"),
                );
            }
            None => {
                report.note(format!("E{}: {} resolved points, no fit", n + 1, ys.len()));
                report.flag(&name, false, f64::NAN, tol, "fewer than three resolved points");
            }
        }
    }

    let counts: Vec<usize> = points.iter().map(|p| p.count).collect();
    let drops = counts.windows(2).filter(|w| w[1] < w[0]).count();
    report.flag(
        "count_non_decreasing",
        drops == 0,
        drops as f64,
        0.0,
        "number of grid steps (θ decreasing) where the count below the threshold drops",
    );
    let mut first_theta = Vec::new();
    for n in 1..=counts.iter().copied().max().unwrap_or(0) {
        let t = thetas.iter().zip(&counts).find(|(_, &c)| c >= n).map(|(&t, _)| t);
        first_theta.push(t);
    }
    report.set("counts", &counts);
    report.set("largest_theta_with_n_eigenvalues", &first_theta);
    Ok(report)
}
