use thiserror::Error;

use crate::geometry::ManifoldId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid manifold: {0}")]
    InvalidManifold(String),

    #[error("{0} has no point model; only scalar queries are supported")]
    UnsupportedPointOperation(ManifoldId),

    #[error("{what} = {value} is outside the admissible range [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("points are at the cut locus (distance {distance}); the minimizing geodesic is not unique")]
    CutLocus { distance: f64 },

    #[error("kernel evaluated at coincident points (distance {distance})")]
    Singularity { distance: f64 },

    #[error("points {i} and {j} coincide; the Green energy is infinite")]
    CoincidentPoints { i: usize, j: usize },

    #[error("quadrature on [{a}, {b}] did not reach tolerance {tol:e} (error estimate {estimate:e})")]
    Quadrature {
        a: f64,
        b: f64,
        tol: f64,
        estimate: f64,
    },

    #[error("kernel table construction failed: {0}")]
    KernelBuild(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("separation constant routes disagree for {manifold}: closed form {closed_form}, volume quotient {quotient}")]
    Consistency {
        manifold: ManifoldId,
        closed_form: f64,
        quotient: f64,
    },

    #[error("no feasible configuration: {0}")]
    Infeasible(String),

    #[error("mesh rejected: {reason} (offending simplices: {simplices:?})")]
    MeshRejected {
        reason: String,
        simplices: Vec<Vec<usize>>,
    },

    #[error("mesh parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("unsupported kernel file version {0}")]
    UnsupportedVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
