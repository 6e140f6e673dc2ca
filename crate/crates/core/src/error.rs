use thiserror::Error;

pub type Result<T, E = QcaError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QcaError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("letter index {letter} out of range for alphabet of size {size}")]
    LetterOutOfRange { letter: usize, size: usize },

    #[error("invalid axis {axis} for a {n}-dimensional lattice")]
    InvalidAxis { axis: usize, n: usize },

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("empty region")]
    EmptyRegion,

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("all-quiescent block is not fixed (deviation {deviation:e})")]
    QuiescenceViolated { deviation: f64 },

    #[error("matrix has {found} rows/columns, expected {expected}")]
    MatrixShape { expected: usize, found: usize },

    #[error("state space of dimension {dim} exceeds the cap of {cap}")]
    CapExceeded { dim: u128, cap: usize },

    #[error("support escaped the window plus margin")]
    SupportEscape,

    #[error("unsupported dimension {n} (this construction is available for n in {{1, 2}})")]
    UnsupportedDimension { n: usize },

    #[error("invalid coding: {0}")]
    InvalidCoding(String),

    #[error("invalid grouping: {0}")]
    InvalidGrouping(String),

    #[error("state norm {norm} deviates from 1")]
    NotNormalized { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
