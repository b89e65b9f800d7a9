//! Finite-element spectral laboratory for two-dimensional Schrödinger operators
//! with δ′-interactions supported on star graphs.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the whole numerical
//! pipeline:
//!
//! * [`geometry`]: star graphs, sectors and truncated domains,
//! * [`mesh`]: interface-conforming triangulations with duplicated crack dofs,
//! * [`assembly`]: P1 matrices of every quadratic form (stiffness, mass, jump,
//!   boundary terms) and constraint elimination,
//! * [`eigensolve`]: shift-invert Lanczos for `A x = λ M x` and inertia counts,
//! * [`models`]: one-call solvers for the operators of interest together with
//!   closed forms, scaling checks and Weyl-sequence quotients.
//!
//! IO, file formats, parameter sweeps and the command line live in the
//! companion `starspec` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod assembly;
pub mod dense;
pub mod eigensolve;
mod error;
pub mod factor;
pub mod geometry;
pub mod mesh;
pub mod models;
pub mod quadrature;
pub mod sparse;
pub mod weyl;

pub use error::{Error, Result};

pub use assembly::{assemble, assemble_with, AssemblyOptions, DofMap, OperatorSpec, OuterCondition};
pub use eigensolve::{count_below, rayleigh, solve_lowest, SolverOptions, Spectrum};
pub use geometry::{broken_line, fold_angle, Sector, StarGraph, TruncatedDomain};
pub use mesh::{BoundaryKind, CrackMesh, MeshParams};
pub use models::{
    exact_delta_prime_1d, scale_check, solve_delta_line, solve_delta_prime_1d, solve_half_problems, solve_robin_sector,
    solve_star, ModelOptions, ModelResult, Problem,
};
pub use sparse::SparseSymMatrix;
pub use weyl::weyl_quotient;
