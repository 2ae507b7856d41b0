use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows} rows, {cols} columns)")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {skew:e}")]
    NotSymmetric { row: usize, col: usize, skew: f64 },

    #[error("diagonal entry {index} is {value}, expected 1")]
    BadDiagonal { index: usize, value: f64 },

    #[error("matrix is not positive definite (eigenvalues span [{min:e}, {max:e}])")]
    NotPositiveDefinite { min: f64, max: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigen-decomposition failed: {0}")]
    EigenFailure(String),

    #[error("CAM eigenvalue {value:e} is not positive")]
    NonPositiveEigenvalue { value: f64 },

    #[error("edge ({u}, {v}) has |correlation| = {rho}, 2x2 submatrix is singular")]
    SingularSubmatrix { u: usize, v: usize, rho: f64 },

    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    #[error("degenerate correlation {rho}: mutual information is unbounded")]
    DegenerateCorrelation { rho: f64 },

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("quadrature did not converge (estimate {estimate:e}, error {error:e})")]
    QuadratureNonConvergence { estimate: f64, error: f64 },

    #[error("beta = {beta} does not keep I + (beta/2)(Lambda - I) positive definite")]
    InvalidBeta { beta: f64 },

    #[error("could not bracket the root for target {target:e}")]
    RootNotBracketed { target: f64 },

    #[error("ROC bin {bin} holds no alternative-hypothesis mass")]
    EmptyBin { bin: usize },

    #[error("n = {n} is too large (maximum {max})")]
    TooLarge { n: usize, max: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Process exit code used by the CLI: 3 for numerical failures, 2 for
    /// everything attributable to the input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::EigenFailure(_)
            | Error::QuadratureNonConvergence { .. }
            | Error::RootNotBracketed { .. } => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
