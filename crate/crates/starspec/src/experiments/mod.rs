//! Parameter sweeps and refinement ladders, each producing an
//! [`ExperimentReport`](crate::report::ExperimentReport).
//!
//! Sweep points run on the current rayon pool; results are gathered in grid
//! order so the reports do not depend on the number of threads.

mod asymptotics;
mod checks;
mod comparison;
mod convergence;
mod corollary;
mod monotonicity;
mod parity;
mod threshold;

pub use asymptotics::{asymptotics_study, AsymptoticsConfig, Preset};
pub use checks::{
    delta_prime_1d_study, repulsive_study, scale_study, solve_report, weyl_study, DeltaPrime1dConfig, RepulsiveConfig,
    ScaleCase, ScaleConfig, SolveConfig, WeylConfig,
};
pub use comparison::{comparison_suite, ComparisonConfig};
pub use convergence::{convergence_study, ConvergenceConfig};
pub use corollary::{corollary_many_eigenvalues, enlarged_graph, CorollaryConfig};
pub use monotonicity::{monotonicity_study, MonotonicityConfig};
pub use parity::{parity_study, ParityConfig};
pub use threshold::{threshold_study, ThresholdConfig};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use starspec_core::assembly::AssemblyOptions;
use starspec_core::mesh::{CrackMesh, MeshParams};
use starspec_core::models::{solve_on_mesh, ModelOptions, ModelResult, Problem};

use crate::config::SolverSpec;
use crate::Result;

/// Ordered parallel map with early error propagation.
pub(crate) fn par_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    items.par_iter().map(f).collect()
}

pub(crate) fn echo<T: Serialize>(cfg: &T) -> Value {
    serde_json::to_value(cfg).unwrap_or(Value::Null)
}

/// Scale used for "relative" comparisons of eigenvalues.
pub(crate) fn scale(a: f64, b: f64) -> f64 {
    1f64.max(a.abs()).max(b.abs())
}

pub(crate) fn solve_with(
    problem: &Problem,
    mesh: CrackMesh,
    params: &MeshParams,
    k: usize,
    solver: &SolverSpec,
    assembly: AssemblyOptions,
) -> Result<ModelResult> {
    let options = ModelOptions {
        assembly,
        solver: solver.options(k),
    };
    Ok(solve_on_mesh(problem, mesh, params, &options)?)
}

pub(crate) fn solve_fresh(
    problem: &Problem,
    params: &MeshParams,
    k: usize,
    solver: &SolverSpec,
) -> Result<ModelResult> {
    let mesh = problem.mesh(params)?;
    solve_with(problem, mesh, params, k, solver, AssemblyOptions::default())
}

/// Mesh parameters for coupling `alpha` given parameters meant for `|α| = 1`.
pub(crate) fn for_coupling(params: MeshParams, alpha: f64) -> MeshParams {
    if alpha != 0.0 {
        params.scaled_down(alpha.abs())
    } else {
        params
    }
}
