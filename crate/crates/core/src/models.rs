//! One-call solvers for every operator, the explicit one-dimensional ground
//! state and the dilation check.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};

use num_traits::Float;

use crate::assembly::{assemble_with, Assembled, AssemblyOptions, OperatorSpec, HALF_PROBLEM_ALPHA};
use crate::eigensolve::{count_below, solve_lowest, SolverOptions, Spectrum};
use crate::geometry::StarGraph;
use crate::mesh::{build_half_domain_mesh, build_sector_mesh, build_star_mesh, BoundaryKind, CrackMesh, MeshParams};
use crate::sparse::SparseSymMatrix;
use crate::{Error, Result};

/// Ground state of `−d²/dx²` on `ℝ \ {0}` with `f'(0±) = −(f(0+) − f(0−))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaPrime1d {
    pub eigenvalue: f64,
}

pub fn exact_delta_prime_1d() -> DeltaPrime1d {
    DeltaPrime1d { eigenvalue: -4.0 }
}

impl DeltaPrime1d {
    /// `sgn(x) e^{−2|x|}`, with value `+1` at `0+` and `−1` at `0−` read
    /// through `side`.
    pub fn eigenfunction(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        Float::signum(x) * Float::exp(-2.0 * Float::abs(x))
    }

    pub fn derivative(&self, x: f64) -> f64 {
        -2.0 * Float::exp(-2.0 * Float::abs(x))
    }

    /// `f(0+) − f(0−)`.
    pub fn jump(&self) -> f64 {
        2.0
    }

    pub fn norm_sq(&self) -> f64 {
        0.5
    }
}

/// P1 matrices on `(−L, 0) ∪ (0, L)` with `n` elements per side, Dirichlet
/// ends, and `coupling · |f(0+) − f(0−)|²`. Unknowns `0..n` are the left
/// nodes (the last one is `0−`), `n..2n` the right ones (the first is `0+`).
pub fn delta_prime_1d_system(half_length: f64, n: usize, coupling: f64) -> Result<(SparseSymMatrix, SparseSymMatrix)> {
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "half-length {half_length} must be positive"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 elements per side, got {n}"
        )));
    }
    let h = half_length / n as f64;
    let mut a = Vec::new();
    let mut m = Vec::new();
    let mut element = |p: Option<usize>, q: Option<usize>| {
        let nodes = [p, q];
        for r in 0..2 {
            for s in 0..2 {
                if let (Some(i), Some(j)) = (nodes[r], nodes[s]) {
                    let k = if r == s { 1.0 / h } else { -1.0 / h };
                    let w = if r == s { h / 3.0 } else { h / 6.0 };
                    a.push((i, j, k));
                    m.push((i, j, w));
                }
            }
        }
    };
    for i in 0..n {
        element(if i == 0 { None } else { Some(i - 1) }, Some(i));
    }
    for j in 0..n {
        element(Some(n + j), if j + 1 == n { None } else { Some(n + j + 1) });
    }
    let (l, r) = (n - 1, n);
    a.extend([(l, l, coupling), (r, r, coupling), (l, r, -coupling), (r, l, -coupling)]);
    Ok((
        SparseSymMatrix::from_triplets(2 * n, &a)?,
        SparseSymMatrix::from_triplets(2 * n, &m)?,
    ))
}

/// Nodal coordinates of the unknowns of [`delta_prime_1d_system`] (`0−` and
/// `0+` both at `0`) together with the side `±1`.
pub fn delta_prime_1d_nodes(half_length: f64, n: usize) -> Vec<(f64, f64)> {
    let h = half_length / n as f64;
    let mut out: Vec<(f64, f64)> = (1..=n).map(|i| (-half_length + h * i as f64, -1.0)).collect();
    out.extend((0..n).map(|j| (h * j as f64, 1.0)));
    out
}

pub fn solve_delta_prime_1d(half_length: f64, n: usize) -> Result<Spectrum> {
    solve_delta_prime_1d_with(half_length, n, -1.0, &SolverOptions::with_k(1))
}

pub fn solve_delta_prime_1d_with(half_length: f64, n: usize, coupling: f64, opts: &SolverOptions) -> Result<Spectrum> {
    let (a, m) = delta_prime_1d_system(half_length, n, coupling)?;
    let mut o = opts.clone();
    if o.shift.is_none() {
        o.shift = Some(if coupling < 0.0 {
            -6.0 * coupling * coupling
        } else {
            -1.0
        });
    }
    solve_lowest(&a, &m, &o)
}

/// What was discretized.
#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    Star(StarGraph),
    RobinSector { gamma: f64, theta: f64 },
    DeltaLine { gamma: f64, theta: f64 },
    HalfNeumann { theta: f64 },
    HalfDirichlet { theta: f64 },
}

impl Problem {
    pub fn spec(&self) -> OperatorSpec {
        match self {
            Problem::Star(g) => OperatorSpec::DeltaPrimeStar { alpha: g.alpha() },
            Problem::RobinSector { gamma, .. } => OperatorSpec::RobinSector { gamma: *gamma },
            Problem::DeltaLine { gamma, .. } => OperatorSpec::DeltaLine { gamma: *gamma },
            Problem::HalfNeumann { .. } => OperatorSpec::HalfNeumann,
            Problem::HalfDirichlet { .. } => OperatorSpec::HalfDirichlet,
        }
    }

    pub fn mesh(&self, params: &MeshParams) -> Result<CrackMesh> {
        match self {
            Problem::Star(g) => build_star_mesh(g, params),
            Problem::RobinSector { theta, .. } => build_sector_mesh(*theta, params),
            Problem::DeltaLine { theta, .. } => build_star_mesh(&line_of(*theta)?, params),
            Problem::HalfNeumann { theta } => build_half_domain_mesh(*theta, BoundaryKind::Neumann, params),
            Problem::HalfDirichlet { theta } => build_half_domain_mesh(*theta, BoundaryKind::Dirichlet, params),
        }
    }

    /// Same problem with its coupling multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Problem> {
        Ok(match self {
            Problem::Star(g) => Problem::Star(g.with_alpha(c * g.alpha())),
            Problem::RobinSector { gamma, theta } => Problem::RobinSector {
                gamma: c * gamma,
                theta: *theta,
            },
            Problem::DeltaLine { gamma, theta } => Problem::DeltaLine {
                gamma: c * gamma,
                theta: *theta,
            },
            _ => {
                return Err(Error::InvalidInput(
                    "the half problems have no coupling to scale".into(),
                ))
            }
        })
    }

    /// A shift below the expected lowest eigenvalue.
    pub fn default_shift(&self) -> f64 {
        let inv_sin2 = |phi: f64| 1.0 / Float::powi(Float::sin(phi.min(FRAC_PI_2)), 2);
        match self {
            Problem::Star(g) => {
                let a = g.alpha();
                if a >= 0.0 {
                    return -1.0;
                }
                let phi = g.sectors().iter().map(|s| s.half_opening).fold(f64::INFINITY, f64::min);
                -6.0 * a * a * (0.25 * inv_sin2(phi)).max(1.0)
            }
            Problem::RobinSector { gamma, theta } => -1.5 * gamma * gamma * inv_sin2(*theta),
            Problem::DeltaLine { gamma, theta } => -1.5 * 0.25 * gamma * gamma * (0.25 * inv_sin2(*theta)).max(1.0),
            Problem::HalfNeumann { theta } | Problem::HalfDirichlet { theta } => {
                -6.0 * HALF_PROBLEM_ALPHA * HALF_PROBLEM_ALPHA * (0.25 * inv_sin2(*theta)).max(1.0)
            }
        }
    }
}

/// Two-branch graph with branches at `±θ`, `θ ∈ (0, π/2]`.
fn line_of(theta: f64) -> Result<StarGraph> {
    if !(theta > 0.0 && theta <= FRAC_PI_2) {
        return Err(Error::Geometry(format!("line angle {theta} outside (0, π/2]")));
    }
    StarGraph::new(alloc::vec![theta, TAU - theta], 0.0)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelOptions {
    pub assembly: AssemblyOptions,
    pub solver: SolverOptions,
}

impl ModelOptions {
    pub fn with_k(k: usize) -> Self {
        ModelOptions {
            assembly: AssemblyOptions::default(),
            solver: SolverOptions::with_k(k),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelResult {
    pub problem: Problem,
    pub spec: OperatorSpec,
    pub mesh_params: MeshParams,
    pub ess_threshold: f64,
    pub spectrum: Spectrum,
    pub options: ModelOptions,
    pub mesh: CrackMesh,
    pub system: Assembled,
}

impl ModelResult {
    /// Inertia count of the assembled system below `threshold`.
    pub fn count_below(&self, threshold: f64) -> Result<usize> {
        count_below(&self.system.a, &self.system.m, threshold)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    pub fn dof_count(&self) -> usize {
        self.system.a.dim()
    }
}

/// Meshes, assembles and solves `problem`.
pub fn solve_problem(problem: &Problem, params: &MeshParams, options: &ModelOptions) -> Result<ModelResult> {
    let mesh = problem.mesh(params)?;
    solve_on_mesh(problem, mesh, params, options)
}

/// Assembles and solves `problem` on a given mesh.
pub fn solve_on_mesh(
    problem: &Problem,
    mesh: CrackMesh,
    params: &MeshParams,
    options: &ModelOptions,
) -> Result<ModelResult> {
    let spec = problem.spec();
    let system = assemble_with(&mesh, spec, &options.assembly)?;
    let mut solver = options.solver.clone();
    if solver.shift.is_none() {
        solver.shift = Some(problem.default_shift());
    }
    let spectrum = solve_lowest(&system.a, &system.m, &solver)?;
    Ok(ModelResult {
        problem: problem.clone(),
        spec,
        mesh_params: *params,
        ess_threshold: spec.ess_threshold(),
        spectrum,
        options: options.clone(),
        mesh,
        system,
    })
}

pub fn solve_star(graph: &StarGraph, params: &MeshParams, k: usize) -> Result<ModelResult> {
    solve_problem(&Problem::Star(graph.clone()), params, &ModelOptions::with_k(k))
}

pub fn solve_robin_sector(gamma: f64, theta: f64, params: &MeshParams, k: usize) -> Result<ModelResult> {
    solve_problem(&Problem::RobinSector { gamma, theta }, params, &ModelOptions::with_k(k))
}

/// `θ = π/2` gives the straight line.
pub fn solve_delta_line(gamma: f64, theta: f64, params: &MeshParams, k: usize) -> Result<ModelResult> {
    solve_problem(&Problem::DeltaLine { gamma, theta }, params, &ModelOptions::with_k(k))
}

pub fn solve_half_problems(theta: f64, params: &MeshParams, k: usize) -> Result<(ModelResult, ModelResult)> {
    solve_half_problems_with(theta, params, &ModelOptions::with_k(k))
}

pub fn solve_half_problems_with(
    theta: f64,
    params: &MeshParams,
    options: &ModelOptions,
) -> Result<(ModelResult, ModelResult)> {
    let n = solve_problem(&Problem::HalfNeumann { theta }, params, options)?;
    let d = solve_problem(&Problem::HalfDirichlet { theta }, params, options)?;
    Ok((n, d))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleReport {
    pub factor: f64,
    pub base: Vec<f64>,
    pub scaled: Vec<f64>,
    /// `max |λ'_i − c²λ_i| / |c²λ_i|`.
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

pub const SCALE_TOLERANCE: f64 = 1e-9;

/// Re-solves with coupling `c·α` (or `c·γ`) on the mesh shrunk by `c` and
/// compares with `c²` times the base eigenvalues.
pub fn scale_check(base: &ModelResult, factor: f64) -> Result<ScaleReport> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::InvalidInput(format!("scale factor {factor} must be positive")));
    }
    let problem = base.problem.scaled(factor)?;
    let params = base.mesh_params.scaled_down(factor);
    let mut options = base.options.clone();
    if let Some(s) = options.solver.shift.as_mut() {
        *s *= factor * factor;
    }
    let scaled = solve_problem(&problem, &params, &options)?;
    let c2 = factor * factor;
    let mut worst: f64 = 0.0;
    for (b, s) in base.eigenvalues().iter().zip(scaled.eigenvalues()) {
        let target = c2 * b;
        worst = worst.max(Float::abs(s - target) / Float::abs(target).max(f64::MIN_POSITIVE));
    }
    let same_len = base.eigenvalues().len() == scaled.eigenvalues().len();
    Ok(ScaleReport {
        factor,
        base: base.eigenvalues().to_vec(),
        scaled: scaled.eigenvalues().to_vec(),
        max_rel_error: worst,
        tolerance: SCALE_TOLERANCE,
        passed: same_len && worst <= SCALE_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ground_state_data() {
        let e = exact_delta_prime_1d();
        assert_eq!(e.eigenvalue, -4.0);
        // f(0+) − f(0−) = −f'(0+).
        assert!((e.jump() + e.derivative(0.0)).abs() < 1e-15);
        assert!((e.eigenfunction(1e-300) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_d_ground_state_is_close_to_minus_four() {
        let s = solve_delta_prime_1d(8.0, 800).unwrap();
        let e = s.eigenvalues[0];
        assert!(e > -4.0 && e < -4.0 + 1e-3, "{e}");
    }

    #[test]
    fn free_one_d_problem_is_nonnegative() {
        let s = solve_delta_prime_1d_with(5.0, 100, 0.0, &SolverOptions::with_k(1)).unwrap();
        assert!(s.eigenvalues[0] > 0.0);
    }
}
