use serde::{Deserialize, Serialize};
use starspec_core::assembly::AssemblyOptions;
use starspec_core::mesh::{refine, MeshParams};

use super::{echo, par_map, scale, solve_fresh, solve_with};
use crate::config::{strictly, GraphSpec, ProblemSpec, SolverSpec};
use crate::error::config_err;
use crate::report::{Cell, ExperimentReport, Fit};
use crate::Result;

/// Truncation ladder in `R` at fixed uniform spacing, and a red-refinement
/// ladder in `h` at fixed `R`.
///
/// With uniform radial spacing and `R/h` integral the meshes of the `R`
/// ladder are nested, so both ladders produce nested discrete spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub problem: ProblemSpec,
    pub radii: Vec<f64>,
    /// Edge length used along the `R` ladder.
    pub radius_ladder_h: f64,
    /// Each entry half the previous one.
    pub hs: Vec<f64>,
    pub h_ladder_radius: f64,
    pub grading: f64,
    pub k: usize,
    /// Allowed increase along a ladder, relative to `max(1, |λ|)`.
    pub monotone_tol: f64,
    /// Allowed relative gap between the two extrapolated limits.
    pub digits_tol: f64,
    pub solver: SolverSpec,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            problem: ProblemSpec::Star {
                graph: GraphSpec::BrokenLine { theta: 0.3 },
                alpha: -1.0,
            },
            radii: vec![8.0, 12.0, 16.0],
            radius_ladder_h: 0.04,
            hs: vec![0.08, 0.04, 0.02],
            h_ladder_radius: 8.0,
            grading: 1.0,
            k: 2,
            monotone_tol: 1e-10,
            digits_tol: 5e-4,
            solver: SolverSpec::default(),
        }
    }
}

impl ConvergenceConfig {
    pub fn validate(&self) -> Result<()> {
        self.problem.problem()?;
        self.solver.validate()?;
        if self.radii.len() < 3 || self.hs.len() < 3 {
            return Err(config_err("both ladders need at least 3 rungs"));
        }
        if !strictly(&self.radii, |a, b| a < b) {
            return Err(config_err("radius ladder must be strictly ascending"));
        }
        for w in self.hs.windows(2) {
            if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
                return Err(config_err("h ladder must halve at every rung (red refinement)"));
            }
        }
        if self.k == 0 {
            return Err(config_err("k must be at least 1"));
        }
        MeshParams::uniform(self.radii[0], self.radius_ladder_h)?;
        MeshParams::new(self.h_ladder_radius, self.hs[0], self.grading)?;
        Ok(())
    }
}

struct Rung {
    radius: f64,
    h: f64,
    dofs: usize,
    eigenvalues: Vec<f64>,
}

pub fn convergence_study(cfg: &ConvergenceConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let problem = cfg.problem.problem()?;
    let mut report = ExperimentReport::new(
        "convergence",
        &["ladder", "R", "h", "dofs", "n", "eigenvalue", "change"],
        echo(cfg),
    );

    let r_rungs = par_map(&cfg.radii, |&r| {
        let params = MeshParams::uniform(r, cfg.radius_ladder_h)?;
        let res = solve_fresh(&problem, &params, cfg.k, &cfg.solver)?;
        Ok(Rung {
            radius: r,
            h: cfg.radius_ladder_h,
            dofs: res.dof_count(),
            eigenvalues: res.spectrum.eigenvalues,
        })
    })?;

    let base = MeshParams::new(cfg.h_ladder_radius, cfg.hs[0], cfg.grading)?;
    let mut meshes = vec![problem.mesh(&base)?];
    for _ in 1..cfg.hs.len() {
        let next = refine(meshes.last().expect("non-empty"))?;
        meshes.push(next);
    }
    let jobs: Vec<(usize, _)> = meshes.into_iter().enumerate().collect();
    let h_rungs = par_map(&jobs, |(i, mesh)| {
        let params = MeshParams { h: cfg.hs[*i], ..base };
        let res = solve_with(
            &problem,
            mesh.clone(),
            &params,
            cfg.k,
            &cfg.solver,
            AssemblyOptions::default(),
        )?;
        Ok(Rung {
            radius: cfg.h_ladder_radius,
            h: cfg.hs[*i],
            dofs: res.dof_count(),
            eigenvalues: res.spectrum.eigenvalues,
        })
    })?;

    let mut worst = [f64::NEG_INFINITY; 2];
    for (li, (name, rungs)) in [("R", &r_rungs), ("h", &h_rungs)].into_iter().enumerate() {
        for (ri, rung) in rungs.iter().enumerate() {
            for (n, &lam) in rung.eigenvalues.iter().enumerate() {
                let change = (ri > 0).then(|| lam - rungs[ri - 1].eigenvalues[n]);
                if let Some(c) = change {
                    worst[li] = worst[li].max(c / scale(lam, 0.0));
                }
                report.push_row(vec![
                    name.into(),
                    rung.radius.into(),
                    rung.h.into(),
                    rung.dofs.into(),
                    (n + 1).into(),
                    lam.into(),
                    Cell::from(change),
                ]);
            }
        }
    }
    for (name, w) in [("monotone_in_R", worst[0]), ("monotone_in_h", worst[1])] {
        report.flag(
            name,
            w <= cfg.monotone_tol,
            w,
            cfg.monotone_tol,
            "largest increase between consecutive rungs relative to max(1,|λ|)",
        );
    }

    let mut shrinking = true;
    let mut agreement_worst: f64 = 0.0;
    for n in 0..cfg.k {
        let scale_n = scale(r_rungs.last().expect("rungs").eigenvalues[n], 0.0);
        let diffs: Vec<f64> = r_rungs
            .windows(2)
            .map(|w| w[0].eigenvalues[n] - w[1].eigenvalues[n])
            .collect();
        for d in diffs.windows(2) {
            if d[1] > d[0] && d[1] > cfg.monotone_tol * scale_n {
                shrinking = false;
            }
        }
        report.set(&format!("truncation_change_E{}", n + 1), diffs.last().copied());

        let m = h_rungs.len();
        let (l1, l2, l3) = (
            h_rungs[m - 3].eigenvalues[n],
            h_rungs[m - 2].eigenvalues[n],
            h_rungs[m - 1].eigenvalues[n],
        );
        let (d1, d2) = (l1 - l2, l2 - l3);
        let floor = 1e-13 * scale(l3, 0.0);
        let (lim_obs, order) = if d2.abs() <= floor {
            (l3, f64::NAN)
        } else if d1 > 0.0 && d2 > 0.0 && d1 > d2 {
            let p = (d1 / d2).log2();
            (l3 - d2 / (2f64.powf(p) - 1.0), p)
        } else {
            (f64::NAN, f64::NAN)
        };
        let lim2 = l3 - d2 / 3.0;
        let gap = (lim_obs - lim2).abs() / scale(lim2, 0.0);
        agreement_worst = if gap.is_nan() {
            f64::INFINITY
        } else {
            agreement_worst.max(gap)
        };
        report.fits.push(Fit {
            name: format!("E{} extrapolation", n + 1),
            basis: vec![
                "limit_observed_order".into(),
                "limit_second_order".into(),
                "observed_order".into(),
            ],
            coefficients: vec![lim_obs, lim2, order],
            deltas: vec![(l3 - lim_obs).abs(), (l3 - lim2).abs(), f64::NAN],
            points: 3,
        });
    }
    report.flag(
        "truncation_differences_shrinking",
        shrinking,
        if shrinking { 0.0 } else { 1.0 },
        cfg.monotone_tol,
        "consecutive R-ladder changes do not grow (changes below the tolerance are ignored)",
    );
    report.flag(
        "extrapolation_agreement",
        agreement_worst <= cfg.digits_tol,
        agreement_worst,
        cfg.digits_tol,
        "relative gap between observed-order and second-order Richardson limits",
    );
    Ok(report)
}
