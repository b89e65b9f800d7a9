use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A geometric input violates its invariants (angles, openings, radii).
    Geometry(String),
    /// The mesh generator cannot honour the requested parameters.
    Meshing(String),
    /// A triangle with non-positive signed area, a missing crack pair or an
    /// unknown edge group was found during assembly.
    Assembly(String),
    /// The operator kind does not match the mesh it is assembled on.
    Incompatible(String),
    /// The symmetric factorization met a (numerically) zero pivot.
    SingularPivot { index: usize, shift: f64 },
    /// The eigensolver did not reach the residual tolerance.
    NotConverged {
        converged: usize,
        requested: usize,
        eigenvalues: alloc::vec::Vec<f64>,
    },
    /// Invalid argument to a numerical routine.
    InvalidInput(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Geometry(msg) => write!(f, "invalid geometry: {msg}"),
            Error::Meshing(msg) => write!(f, "meshing failed: {msg}"),
            Error::Assembly(msg) => write!(f, "assembly failed: {msg}"),
            Error::Incompatible(msg) => write!(f, "operator/mesh mismatch: {msg}"),
            Error::SingularPivot { index, shift } => {
                write!(f, "zero pivot at row {index} for shift {shift}")
            }
            Error::NotConverged {
                converged, requested, ..
            } => write!(f, "eigensolver converged {converged} of {requested} requested pairs"),
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
