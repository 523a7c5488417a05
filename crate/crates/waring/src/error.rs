//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("matrix is numerically singular")]
    Singular,
    #[error("rank never reached the point count; point set has (near-)duplicate rows")]
    Unreachable,
    #[error("tensor order must be at least 3 for slice-based decomposition")]
    OrderTooSmall,
    #[error("slice combination has fewer independent eigenvectors than the target size")]
    DefectiveSpectrum,
    #[error("eigenvector has a vanishing coordinate at the constant monomial; apply a random basis change and retry")]
    NormalizationFailure,
    #[error("reconstruction residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("principal moment block is numerically singular")]
    SingularPrincipalBlock,
    #[error("multiplication matrices are defective for this assignment")]
    Defective,
    #[error(
        "eigenvalue cross-check failed: coordinate read from eigenvector disagrees with eigenvalue"
    )]
    EigenvalueMismatch,
    #[error("operation supports order d = 4 only (got d = {0})")]
    OrderUnsupported(usize),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("no admissible n found below the search cap")]
    Unverifiable,
    #[error("parameter {0} is zero in one assignment but not the other")]
    ZeroParameter(String),
    #[error("internal cross-check failed: {0}")]
    InternalMismatch(String),
    #[error("moment value for exponent {0} is unresolved")]
    UnresolvedMoment(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{stage}: {source}")]
    Staged {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Wraps an error with the pipeline stage it occurred in.
    pub fn staged(stage: &str, source: Error) -> Self {
        Error::Staged {
            stage: stage.to_string(),
            source: Box::new(source),
        }
    }

    /// Innermost error, unwrapping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Staged { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
