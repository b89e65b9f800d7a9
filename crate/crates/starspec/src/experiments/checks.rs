use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use starspec_core::assembly::{assemble_with, AssemblyOptions, OuterCondition};
use starspec_core::eigensolve::{count_below, rayleigh, solve_lowest};
use starspec_core::models::{delta_prime_1d_system, exact_delta_prime_1d, scale_check, Problem};
use starspec_core::weyl::weyl_terms_on;

use super::{echo, par_map, solve_fresh, solve_with};
use crate::config::{GraphSpec, MeshSpec, ProblemSpec, SolverSpec};
use crate::error::config_err;
use crate::report::{Cell, ExperimentReport};
use crate::Result;

/// One operator, one mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    pub problem: ProblemSpec,
    pub mesh: MeshSpec,
    pub k: usize,
    /// Count threshold; defaults to the essential-spectrum threshold.
    pub threshold: Option<f64>,
    pub neumann_outer: bool,
    pub solver: SolverSpec,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            problem: ProblemSpec::Star {
                graph: GraphSpec::BrokenLine { theta: 0.3 },
                alpha: -1.0,
            },
            mesh: MeshSpec::new(8.0, 0.04, 1.0),
            k: 4,
            threshold: None,
            neumann_outer: false,
            solver: SolverSpec::default(),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(config_err("k must be at least 1"));
        }
        self.solver.validate()?;
        match self.problem {
            ProblemSpec::DeltaPrime1d { half_length, points } => {
                if !(half_length > 0.0 && half_length.is_finite()) || points < 2 {
                    return Err(config_err("1D model needs L > 0 and at least 2 points per side"));
                }
            }
            _ => {
                self.problem.problem()?;
                self.mesh.params()?;
            }
        }
        Ok(())
    }
}

pub fn solve_report(cfg: &SolveConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut report = ExperimentReport::new("solve", &["n", "eigenvalue", "residual", "below_threshold"], echo(cfg));
    let (spectrum, count, threshold, dofs) = match cfg.problem {
        ProblemSpec::DeltaPrime1d { half_length, points } => {
            let (a, m) = delta_prime_1d_system(half_length, points, -1.0)?;
            let mut opts = cfg.solver.options(cfg.k);
            opts.shift = Some(-6.0);
            let t = cfg.threshold.unwrap_or(-4.0);
            let s = solve_lowest(&a, &m, &opts)?;
            (s, count_below(&a, &m, t)?, t, a.dim())
        }
        _ => {
            let problem = cfg.problem.problem()?;
            let params = cfg.mesh.params()?;
            let assembly = AssemblyOptions {
                outer: if cfg.neumann_outer {
                    OuterCondition::Neumann
                } else {
                    OuterCondition::Dirichlet
                },
                ..AssemblyOptions::default()
            };
            let res = solve_with(&problem, problem.mesh(&params)?, &params, cfg.k, &cfg.solver, assembly)?;
            let t = cfg.threshold.unwrap_or(res.ess_threshold);
            let c = res.count_below(t)?;
            let d = res.dof_count();
            (res.spectrum, c, t, d)
        }
    };
    for (n, (&e, &r)) in spectrum.eigenvalues.iter().zip(&spectrum.residuals).enumerate() {
        report.push_row(vec![(n + 1).into(), e.into(), r.into(), (e < threshold).into()]);
    }
    report.set("operator", cfg.problem.label());
    report.set("threshold", threshold);
    report.set("count_below", count);
    report.set("dofs", dofs);
    report.set("eigenvalues", &spectrum.eigenvalues);
    let res = spectrum.max_residual();
    report.flag(
        "residuals",
        res <= cfg.solver.tol,
        res,
        cfg.solver.tol,
        "largest relative residual",
    );
    let listed = spectrum.eigenvalues.iter().filter(|&&e| e < threshold).count();
    let consistent = if count < spectrum.len() {
        listed == count
    } else {
        listed == spectrum.len()
    };
    report.flag(
        "inertia_matches_solver",
        consistent,
        count as f64,
        listed as f64,
        "inertia count against eigenvalues listed below the threshold",
    );
    Ok(report)
}

/// Refinement ladder for the one-dimensional model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaPrime1dConfig {
    pub half_length: f64,
    /// Points per side, each twice the previous.
    pub points: Vec<usize>,
    /// `E₁` of the finest rung must lie in `(−4, −4 + window)`.
    pub window: f64,
    pub order_range: [f64; 2],
    pub solver: SolverSpec,
}

impl Default for DeltaPrime1dConfig {
    fn default() -> Self {
        DeltaPrime1dConfig {
            half_length: 10.0,
            points: vec![1250, 2500, 5000, 10000],
            window: 1e-3,
            order_range: [1.8, 2.2],
            solver: SolverSpec::default(),
        }
    }
}

pub fn delta_prime_1d_study(cfg: &DeltaPrime1dConfig) -> Result<ExperimentReport> {
    if cfg.points.len() < 2 || cfg.points.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(config_err(
            "the ladder needs at least two rungs, each doubling the previous",
        ));
    }
    if !(cfg.half_length > 0.0) || cfg.points[0] < 2 {
        return Err(config_err("need L > 0 and at least 2 points per side"));
    }
    cfg.solver.validate()?;
    let exact = exact_delta_prime_1d().eigenvalue;
    let rungs = par_map(&cfg.points, |&n| {
        let (a, m) = delta_prime_1d_system(cfg.half_length, n, -1.0)?;
        let mut opts = cfg.solver.options(1);
        opts.shift = Some(-6.0);
        Ok(solve_lowest(&a, &m, &opts)?)
    })?;
    let mut report = ExperimentReport::new(
        "delta_prime_1d",
        &["points", "h", "eigenvalue", "error", "error_ratio"],
        echo(cfg),
    );
    let errors: Vec<f64> = rungs.iter().map(|s| s.eigenvalues[0] - exact).collect();
    for (i, (&n, &e)) in cfg.points.iter().zip(&errors).enumerate() {
        let ratio = (i > 0).then(|| errors[i - 1] / e);
        report.push_row(vec![
            n.into(),
            (cfg.half_length / n as f64).into(),
            (e + exact).into(),
            e.into(),
            Cell::from(ratio),
        ]);
    }
    let last = *errors.last().expect("rungs");
    report.flag(
        "finest_in_window",
        last > 0.0 && last < cfg.window,
        last,
        cfg.window,
        "E₁ + 4 on the finest rung must lie in (0, window)",
    );
    let upper = errors.iter().all(|&e| e > 0.0);
    let monotone = errors.windows(2).all(|w| w[1] < w[0]);
    report.flag(
        "monotone_upper_bounds",
        upper && monotone,
        errors.iter().copied().fold(f64::INFINITY, f64::min),
        0.0,
        "every rung above −4 and decreasing under refinement",
    );
    let m = errors.len();
    let order = (errors[m - 2] / errors[m - 1]).log2();
    report.set("observed_order", order);
    report.flag(
        "second_order",
        order >= cfg.order_range[0] && order <= cfg.order_range[1],
        order,
        cfg.order_range[1] - cfg.order_range[0],
        format!("observed order within [{}, {}]", cfg.order_range[0], cfg.order_range[1]),
    );
    let v = &rungs[m - 1].eigenvectors[0];
    let n = cfg.points[m - 1];
    let vmax = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let odd = (0..n).map(|j| (v[n - 1 - j] + v[n + j]).abs()).fold(0.0f64, f64::max) / vmax;
    report.flag(
        "odd_ground_state",
        odd <= 1e-8,
        odd,
        1e-8,
        "max |v(−x) + v(x)| / max |v|",
    );
    let (a0, m0) = delta_prime_1d_system(cfg.half_length, cfg.points[0], 0.0)?;
    let mut opts = cfg.solver.options(1);
    opts.shift = Some(-1.0);
    let free = solve_lowest(&a0, &m0, &opts)?.eigenvalues[0];
    report.flag(
        "free_laplacian_nonnegative",
        free >= 0.0,
        free,
        0.0,
        "lowest eigenvalue without the jump term",
    );
    Ok(report)
}

/// Non-negative couplings on several graphs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepulsiveConfig {
    pub alphas: Vec<f64>,
    pub graphs: Vec<GraphSpec>,
    pub mesh: MeshSpec,
    /// Random trial vectors per system.
    pub samples: usize,
    pub seed: u64,
    pub margin: f64,
    pub solver: SolverSpec,
}

impl Default for RepulsiveConfig {
    fn default() -> Self {
        RepulsiveConfig {
            alphas: vec![0.0, 0.5],
            graphs: vec![
                GraphSpec::Line,
                GraphSpec::HalfLine,
                GraphSpec::BrokenLine { theta: 0.3 },
                GraphSpec::Angles {
                    angles: vec![0.0, 0.4, std::f64::consts::PI],
                },
            ],
            mesh: MeshSpec::new(4.0, 0.1, 1.0),
            samples: 32,
            seed: 7,
            margin: 1e-8,
            solver: SolverSpec::default(),
        }
    }
}

struct RepulsivePoint {
    dofs: usize,
    count: usize,
    lowest: f64,
    min_rayleigh: f64,
}

pub fn repulsive_study(cfg: &RepulsiveConfig) -> Result<ExperimentReport> {
    if cfg.alphas.iter().any(|&a| !(a >= 0.0 && a.is_finite())) {
        return Err(config_err("repulsive study takes alpha >= 0 only"));
    }
    if cfg.graphs.is_empty() || cfg.alphas.is_empty() {
        return Err(config_err("need at least one graph and one coupling"));
    }
    cfg.solver.validate()?;
    let params = cfg.mesh.params()?;
    let jobs: Vec<(f64, &GraphSpec)> = cfg
        .alphas
        .iter()
        .flat_map(|&a| cfg.graphs.iter().map(move |g| (a, g)))
        .collect();
    let points = par_map(&jobs, |&(alpha, g)| {
        let problem = Problem::Star(g.graph(alpha)?);
        let mesh = problem.mesh(&params)?;
        let sys = assemble_with(&mesh, problem.spec(), &AssemblyOptions::default())?;
        let count = count_below(&sys.a, &sys.m, -cfg.margin)?;
        let res = solve_with(&problem, mesh, &params, 1, &cfg.solver, AssemblyOptions::default())?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut min_rayleigh = res.spectrum.eigenvalues[0].max(0.0);
        for _ in 0..cfg.samples {
            let x: Vec<f64> = (0..sys.a.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            min_rayleigh = min_rayleigh.min(rayleigh(&sys.a, &sys.m, &x)?);
        }
        let v = &res.spectrum.eigenvectors[0];
        min_rayleigh = min_rayleigh.min(rayleigh(&res.system.a, &res.system.m, v)?);
        Ok(RepulsivePoint {
            dofs: sys.a.dim(),
            count,
            lowest: res.spectrum.eigenvalues[0],
            min_rayleigh,
        })
    })?;
    let mut report = ExperimentReport::new(
        "repulsive",
        &["alpha", "graph", "dofs", "count_below", "lowest", "min_rayleigh"],
        echo(cfg),
    );
    let mut total = 0;
    let mut min_q = f64::INFINITY;
    for ((alpha, g), p) in jobs.iter().zip(&points) {
        total += p.count;
        min_q = min_q.min(p.min_rayleigh);
        report.push_row(vec![
            (*alpha).into(),
            g.label().into(),
            p.dofs.into(),
            p.count.into(),
            p.lowest.into(),
            p.min_rayleigh.into(),
        ]);
    }
    report.flag(
        "no_spectrum_below_zero",
        total == 0,
        total as f64,
        cfg.margin,
        "inertia counts below −margin summed over all systems",
    );
    report.flag(
        "rayleigh_nonnegative",
        min_q >= 0.0,
        min_q,
        0.0,
        "smallest Rayleigh quotient over random vectors and the lowest eigenvector",
    );
    Ok(report)
}

/// Residual quotients of the trial functions on the first branch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeylConfig {
    pub graph: GraphSpec,
    pub k: f64,
    pub ns: Vec<f64>,
    /// Defaults to half the smallest |tan φ| of the nearby branches.
    pub a: Option<f64>,
    pub quad_points: usize,
    /// Bound on quotient(last) / quotient(first).
    pub ratio_tol: f64,
}

impl Default for WeylConfig {
    fn default() -> Self {
        WeylConfig {
            graph: GraphSpec::BrokenLine { theta: 0.3 },
            k: 0.0,
            ns: vec![10.0, 40.0, 160.0],
            a: None,
            quad_points: 16,
            ratio_tol: 0.25,
        }
    }
}

pub fn weyl_study(cfg: &WeylConfig) -> Result<ExperimentReport> {
    if cfg.ns.len() < 2 || cfg.ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(config_err("need at least two strictly increasing n values"));
    }
    let graph = cfg.graph.graph(-1.0)?;
    let terms = cfg
        .ns
        .iter()
        .map(|&n| weyl_terms_on(&graph, cfg.k, n, cfg.a, cfg.quad_points))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut report = ExperimentReport::new(
        "weyl",
        &["n", "quotient", "residual_sq", "norm_sq", "norm_sq_over_n"],
        echo(cfg),
    );
    for (&n, t) in cfg.ns.iter().zip(&terms) {
        report.push_row(vec![
            n.into(),
            t.quotient.into(),
            t.residual_sq.into(),
            t.norm_sq.into(),
            (t.norm_sq / n).into(),
        ]);
    }
    report.set("spectral_point", cfg.k * cfg.k - 4.0);
    let decreasing = terms.windows(2).all(|w| w[1].quotient < w[0].quotient);
    report.flag(
        "quotient_decreasing",
        decreasing,
        if decreasing { 0.0 } else { 1.0 },
        0.0,
        "quotient strictly decreasing in n",
    );
    let ratio = terms.last().expect("terms").quotient / terms[0].quotient;
    report.flag(
        "quotient_decay",
        ratio <= cfg.ratio_tol,
        ratio,
        cfg.ratio_tol,
        "quotient(last n) / quotient(first n)",
    );
    let per_n: Vec<f64> = cfg.ns.iter().zip(&terms).map(|(&n, t)| t.norm_sq / n).collect();
    let growth = per_n.iter().copied().fold(f64::INFINITY, f64::min) / per_n[0];
    report.flag(
        "norm_grows_linearly",
        growth >= 0.5,
        growth,
        0.5,
        "min over n of (‖f_n‖²/n) relative to the first n",
    );
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleCase {
    pub problem: ProblemSpec,
    pub factor: f64,
}

/// Coupling rescale against mesh rescale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleConfig {
    pub cases: Vec<ScaleCase>,
    pub mesh: MeshSpec,
    pub k: usize,
    pub tol: f64,
    pub solver: SolverSpec,
}

impl Default for ScaleConfig {
    fn default() -> Self {
        let star = ProblemSpec::Star {
            graph: GraphSpec::BrokenLine { theta: 0.3 },
            alpha: -1.0,
        };
        let robin = ProblemSpec::RobinSector { gamma: 1.0, theta: 0.3 };
        ScaleConfig {
            cases: vec![
                ScaleCase {
                    problem: star.clone(),
                    factor: 2.0,
                },
                ScaleCase {
                    problem: star,
                    factor: 0.5,
                },
                ScaleCase {
                    problem: robin.clone(),
                    factor: 2.0,
                },
                ScaleCase {
                    problem: robin,
                    factor: 3.0,
                },
            ],
            mesh: MeshSpec::new(8.0, 0.08, 2.0),
            k: 3,
            tol: 1e-9,
            solver: SolverSpec::default(),
        }
    }
}

pub fn scale_study(cfg: &ScaleConfig) -> Result<ExperimentReport> {
    if cfg.cases.is_empty() || cfg.k == 0 {
        return Err(config_err("need at least one case and k >= 1"));
    }
    for c in &cfg.cases {
        let p = c.problem.problem()?;
        if !(c.factor > 0.0 && c.factor.is_finite()) {
            return Err(config_err(format!("scale factor {} must be positive", c.factor)));
        }
        p.scaled(c.factor)?;
    }
    cfg.solver.validate()?;
    let params = cfg.mesh.params()?;
    let results = par_map(&cfg.cases, |c| {
        let base = solve_fresh(&c.problem.problem()?, &params, cfg.k, &cfg.solver)?;
        Ok(scale_check(&base, c.factor)?)
    })?;
    let mut report = ExperimentReport::new(
        "scale",
        &[
            "case",
            "operator",
            "factor",
            "n",
            "base",
            "scaled",
            "expected",
            "rel_error",
        ],
        echo(cfg),
    );
    let mut worst: f64 = 0.0;
    for (i, (c, r)) in cfg.cases.iter().zip(&results).enumerate() {
        let c2 = c.factor * c.factor;
        for (n, (&b, &s)) in r.base.iter().zip(&r.scaled).enumerate() {
            let rel = (s - c2 * b).abs() / (c2 * b).abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            report.push_row(vec![
                (i + 1).into(),
                c.problem.label().into(),
                c.factor.into(),
                (n + 1).into(),
                b.into(),
                s.into(),
                (c2 * b).into(),
                rel.into(),
            ]);
        }
    }
    report.flag(
        "scaling_exact",
        worst <= cfg.tol,
        worst,
        cfg.tol,
        "largest relative deviation from c² times the base spectrum",
    );
    Ok(report)
}
