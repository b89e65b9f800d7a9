use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use starspec_core::assembly::AssemblyOptions;
use starspec_core::eigensolve::rayleigh;
use starspec_core::geometry::{broken_line, StarGraph};
use starspec_core::mesh::{build_star_mesh, CrackMesh, MeshParams};
use starspec_core::models::{ModelResult, Problem};

use super::{echo, par_map, scale, solve_with};
use crate::config::{check_theta, MeshSpec, SolverSpec};
use crate::error::config_err;
use crate::report::{Cell, ExperimentReport};
use crate::Result;

/// Discrete form inequalities between the broken-line operator and its
/// comparison operators, all assembled on one star mesh per angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonConfig {
    pub thetas: Vec<f64>,
    pub mesh: MeshSpec,
    pub n_max: usize,
    /// `ε = b·θ` for each `b`.
    pub eps_factors: Vec<f64>,
    /// Also use `b = 2n − 1.5` for every `n ≤ n_max`.
    pub proof_factors: bool,
    /// Angle of the branch added for the subgraph comparison.
    pub extra_branch: f64,
    /// Allowed violation relative to `max(1, |λ|)`.
    pub tol: f64,
    pub solver: SolverSpec,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig {
            thetas: vec![0.2, 0.3],
            mesh: MeshSpec::new(8.0, 0.04, 2.0),
            n_max: 4,
            eps_factors: vec![0.5, 1.0],
            proof_factors: true,
            extra_branch: PI,
            tol: 1e-8,
            solver: SolverSpec::default(),
        }
    }
}

impl ComparisonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() {
            return Err(config_err("theta grid is empty"));
        }
        self.thetas.iter().try_for_each(|&t| check_theta(t))?;
        if self.n_max == 0 {
            return Err(config_err("n_max must be at least 1"));
        }
        if self.eps_factors.iter().any(|&b| !(b > 0.0 && b.is_finite())) {
            return Err(config_err("eps factors must be positive"));
        }
        for &t in &self.thetas {
            broken_line(t, -1.0)?.with_branch(self.extra_branch)?;
        }
        self.solver.validate()?;
        self.mesh.params()?;
        Ok(())
    }

    fn eps_values(&self, theta: f64) -> Vec<f64> {
        let mut b = self.eps_factors.clone();
        if self.proof_factors {
            b.extend((1..=self.n_max).map(|n| 2.0 * n as f64 - 1.5));
        }
        b.sort_by(f64::total_cmp);
        b.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        b.into_iter().map(|b| b * theta).collect()
    }
}

/// One evaluated relation. `margin ≥ 0` means it holds.
struct Relation {
    name: &'static str,
    detail: String,
    n: usize,
    lhs: f64,
    rhs: f64,
    margin: f64,
}

struct Ctx<'a> {
    cfg: &'a ComparisonConfig,
    params: MeshParams,
}

impl Ctx<'_> {
    fn solve(&self, problem: &Problem, mesh: &CrackMesh, assembly: AssemblyOptions) -> Result<ModelResult> {
        solve_with(
            problem,
            mesh.clone(),
            &self.params,
            self.cfg.n_max,
            &self.cfg.solver,
            assembly,
        )
    }

    fn robin_sum(&self, mesh: &CrackMesh, graph: &StarGraph, gamma: f64) -> Result<Vec<f64>> {
        let mut all = Vec::new();
        for (s, sector) in graph.sectors().iter().enumerate() {
            let sub = mesh.sector_submesh(s)?;
            let problem = Problem::RobinSector {
                gamma,
                theta: sector.half_opening,
            };
            all.extend(
                self.solve(&problem, &sub, AssemblyOptions::default())?
                    .spectrum
                    .eigenvalues,
            );
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }
}

fn le(name: &'static str, detail: String, n: usize, lhs: f64, rhs: f64) -> Relation {
    Relation {
        name,
        detail,
        n,
        lhs,
        rhs,
        margin: (rhs - lhs) / scale(lhs, rhs),
    }
}

fn ge(name: &'static str, detail: String, n: usize, lhs: f64, rhs: f64) -> Relation {
    Relation {
        name,
        detail,
        n,
        lhs,
        rhs,
        margin: (lhs - rhs) / scale(lhs, rhs),
    }
}

fn eq(name: &'static str, detail: String, n: usize, lhs: f64, rhs: f64) -> Relation {
    Relation {
        name,
        detail,
        n,
        lhs,
        rhs,
        margin: -(lhs - rhs).abs() / scale(lhs, rhs),
    }
}

fn at_theta(ctx: &Ctx, theta: f64) -> Result<Vec<Relation>> {
    let cfg = ctx.cfg;
    let graph = broken_line(theta, -1.0)?;
    let mesh = build_star_mesh(&graph, &ctx.params)?;
    let h = ctx.solve(&Problem::Star(graph.clone()), &mesh, AssemblyOptions::default())?;
    let lam = |n: usize| h.spectrum.eigenvalues[n];
    let sectors = graph.sectors();
    let plus = sectors
        .iter()
        .position(|s| (s.half_opening - theta).abs() < 1e-12)
        .expect("broken line has a sector of half-opening theta");
    let mut out = Vec::new();

    // zero extension from the narrow sector
    let (sub, parent) = mesh.sector_submesh_with_map(plus)?;
    let q1 = ctx.solve(
        &Problem::RobinSector { gamma: 1.0, theta },
        &sub,
        AssemblyOptions::default(),
    )?;
    for n in 0..cfg.n_max {
        out.push(le("H<=Q1", String::new(), n, lam(n), q1.spectrum.eigenvalues[n]));
        let v = &q1.spectrum.eigenvectors[n];
        let local = q1.system.dofs.expand(v);
        let mut full = vec![0.0; mesh.dof_count()];
        for (i, &p) in parent.iter().enumerate() {
            full[p] = local[i];
        }
        let x = h.system.dofs.restrict(&full);
        let t = rayleigh(&h.system.a, &h.system.m, &x)?;
        let q = rayleigh(&q1.system.a, &q1.system.m, v)?;
        out.push(eq("t(Jv)=q1(v)", String::new(), n, t, q));
    }

    // sign flip from the δ-line operator on the merged mesh
    let a4 = ctx.solve(
        &Problem::DeltaLine { gamma: 4.0, theta },
        &mesh,
        AssemblyOptions::default(),
    )?;
    for n in 0..cfg.n_max {
        out.push(le("H<=A4", String::new(), n, lam(n), a4.spectrum.eigenvalues[n]));
        let u = &a4.spectrum.eigenvectors[n];
        let mut full = a4.system.dofs.expand(u);
        for (i, x) in full.iter_mut().enumerate() {
            if mesh.dof_sector()[i] != plus {
                *x = -*x;
            }
        }
        let x = h.system.dofs.restrict(&full);
        let t = rayleigh(&h.system.a, &h.system.m, &x)?;
        let a = rayleigh(&a4.system.a, &a4.system.m, u)?;
        out.push(eq("t(Su)=a4(u)", String::new(), n, t, a));
    }

    for eps in cfg.eps_values(theta) {
        let q = ctx.solve(
            &Problem::RobinSector {
                gamma: 1.0 + eps,
                theta,
            },
            &sub,
            AssemblyOptions::default(),
        )?;
        let floor = -(1.0 + 1.0 / eps).powi(2);
        for n in 0..cfg.n_max {
            let bound = q.spectrum.eigenvalues[n].min(floor);
            out.push(ge(
                "H>=min(Q1+eps,-(1+1/eps)^2)",
                format!("eps={eps}"),
                n,
                lam(n),
                bound,
            ));
        }
    }

    let sum = ctx.robin_sum(&mesh, &graph, 2.0)?;
    for n in 0..cfg.n_max {
        out.push(ge("T>=robin2_sum", "broken line".into(), n, lam(n), sum[n]));
    }

    let big = graph.with_branch(cfg.extra_branch)?;
    let extra = big
        .branch_indices_of(&StarGraph::new(vec![wrap(cfg.extra_branch)], -1.0)?)
        .and_then(|v| v.first().copied())
        .ok_or_else(|| config_err("extra branch not found in the enlarged graph"))?;
    let big_mesh = build_star_mesh(&big, &ctx.params)?;
    let t_big = ctx.solve(&Problem::Star(big.clone()), &big_mesh, AssemblyOptions::default())?;
    let t_sub = ctx.solve(
        &Problem::Star(graph.clone()),
        &big_mesh,
        AssemblyOptions {
            inactive_branches: vec![extra],
            ..AssemblyOptions::default()
        },
    )?;
    let big_sum = ctx.robin_sum(&big_mesh, &big, 2.0)?;
    for n in 0..cfg.n_max {
        let (tb, ts) = (t_big.spectrum.eigenvalues[n], t_sub.spectrum.eigenvalues[n]);
        out.push(le(
            "T(bigger)<=T(sub)",
            format!("extra={}", cfg.extra_branch),
            n,
            tb,
            ts,
        ));
        out.push(ge("T>=robin2_sum", "with extra branch".into(), n, tb, big_sum[n]));
    }
    Ok(out)
}

fn wrap(a: f64) -> f64 {
    a.rem_euclid(2.0 * PI)
}

pub fn comparison_suite(cfg: &ComparisonConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let ctx = Ctx {
        cfg,
        params: cfg.mesh.params()?,
    };
    let per_theta = par_map(&cfg.thetas, |&t| at_theta(&ctx, t))?;
    let mut report = ExperimentReport::new(
        "comparison",
        &["theta", "relation", "detail", "n", "lhs", "rhs", "margin", "holds"],
        echo(cfg),
    );
    let mut worst: Vec<(&'static str, f64)> = Vec::new();
    for (&theta, rels) in cfg.thetas.iter().zip(&per_theta) {
        for r in rels {
            report.push_row(vec![
                theta.into(),
                r.name.into(),
                Cell::Text(r.detail.clone()),
                (r.n + 1).into(),
                r.lhs.into(),
                r.rhs.into(),
                r.margin.into(),
                (r.margin >= -cfg.tol).into(),
            ]);
            match worst.iter_mut().find(|(n, _)| *n == r.name) {
                Some(w) => w.1 = w.1.min(r.margin),
                None => worst.push((r.name, r.margin)),
            }
        }
    }
    for (name, m) in worst {
        report.flag(
            name,
            m >= -cfg.tol,
            m,
            cfg.tol,
            "smallest relative margin over all angles and indices (negative = violation)",
        );
    }
    Ok(report)
}
