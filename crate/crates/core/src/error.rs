use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite: min eigenvalue {min_eigenvalue:e} <= floor {floor:e}")]
    NotPositiveDefinite { min_eigenvalue: f64, floor: f64 },

    #[error("matrix is not symmetric: max |A - A^T| = {violation:e}")]
    NotSymmetric { violation: f64 },

    #[error("matrix is not skew-symmetric: max |M + M^T| = {violation:e}")]
    NotSkewSymmetric { violation: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} is not even (symplectic structure needs 2n)")]
    DimensionOdd(usize),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid pairing: {0}")]
    InvalidPairing(String),

    #[error("no standard-deviation nominal for variable '{0}'")]
    MissingNominal(String),

    #[error("zero nominal value for parameter '{0}'")]
    ZeroNominal(String),

    #[error("invalid input model: {0}")]
    InvalidModel(String),

    #[error("output dimension {0} too high for kernel regression (max 3)")]
    OutputDimTooHigh(usize),

    #[error("kernel weights vanish at query point {query}")]
    DegenerateKernel { query: usize },

    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),

    #[error("eigenvalue {index} is not positive ({value:e})")]
    NonPositiveEigenvalue { index: usize, value: f64 },

    #[error("benchmark coefficients are not loaded")]
    CoefficientsNotLoaded,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("wrong coefficient count for {section}: expected {expected}, found {found}")]
    CoefficientDimension {
        section: String,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors raised by the numerical kernels (as opposed to
    /// malformed configuration or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NotSkewSymmetric { .. }
                | Error::DegenerateKernel { .. }
                | Error::NonPositiveEigenvalue { .. }
                | Error::NonFinite(_)
        )
    }
}
