use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    NonConvergence { rows: usize, cols: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("submatrix is rank deficient (smallest singular value {smallest:e})")]
    RankDeficient { smallest: f64 },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("supports overlap at index {index}")]
    OverlappingSupports { index: usize },

    #[error("{what}: {candidates} supports exceed the enumeration limit {limit}; {hint}")]
    EnumerationLimit {
        what: &'static str,
        candidates: u128,
        limit: u128,
        hint: &'static str,
    },

    #[error("trial {trial_id}: {source}")]
    Trial {
        trial_id: u64,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("{0}")]
    Other(String),
}

impl Error {
    /// True for failures of the numerical kernels, as opposed to bad input or
    /// configuration.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonConvergence { .. }
            | Error::NotPositiveDefinite { .. }
            | Error::NotSymmetric { .. }
            | Error::NonFinite
            | Error::RankDeficient { .. } => true,
            Error::Trial { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
