use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the command line to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector has zero norm")]
    ZeroNormVector,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite value in input")]
    NonFiniteInput,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated input while reading {what}")]
    Truncated { what: &'static str },
    #[error("non-finite value at sentence {sentence}, token {token}, layer {layer}")]
    NonFiniteValue {
        sentence: usize,
        token: usize,
        layer: usize,
    },
    #[error("invalid token at sentence {sentence}, token {token}: {reason}")]
    InvalidToken {
        sentence: usize,
        token: usize,
        reason: String,
    },
    #[error("continuation token {token} of sentence {sentence} has no word to attach to")]
    OrphanContinuation { sentence: usize, token: usize },
    #[error("sentence {sentence} has no tokens left after filtering")]
    EmptySentence { sentence: usize },
    #[error("layer {layer} has no neighbors inside the included layer range")]
    EmptyNeighborhood { layer: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("input file is empty")]
    EmptyFile,
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("offset {offset} out of range for a {size}x{size} matrix")]
    OffsetOutOfRange { offset: usize, size: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{0}")]
    Mismatch(String),
    #[error("I/O failure: {0}")]
    Io(#[from] io::Error),
    #[error("JSON failure: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            ZeroNormVector | NumericalFailure(_) | ZeroVariance | NonFiniteInput => {
                ErrorClass::Numerical
            }
            InvalidConfig(_) => ErrorClass::Usage,
            _ => ErrorClass::Data,
        }
    }

    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            ZeroNormVector => "ZERO_NORM_VECTOR",
            DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            NonFiniteInput => "NON_FINITE_INPUT",
            NumericalFailure(_) => "NUMERICAL_FAILURE",
            BadMagic { .. } => "BAD_MAGIC",
            UnsupportedVersion(_) => "UNSUPPORTED_VERSION",
            Truncated { .. } => "TRUNCATED",
            NonFiniteValue { .. } => "NON_FINITE_VALUE",
            InvalidToken { .. } => "INVALID_TOKEN",
            OrphanContinuation { .. } => "ORPHAN_CONTINUATION",
            EmptySentence { .. } => "EMPTY_SENTENCE",
            EmptyNeighborhood { .. } => "EMPTY_NEIGHBORHOOD",
            InvalidConfig(_) => "INVALID_CONFIG",
            MalformedLine { .. } => "MALFORMED_LINE",
            EmptyFile => "EMPTY_FILE",
            ZeroVariance => "ZERO_VARIANCE",
            TooFewSamples { .. } => "TOO_FEW_SAMPLES",
            OffsetOutOfRange { .. } => "OFFSET_OUT_OF_RANGE",
            EmptyCorpus => "EMPTY_CORPUS",
            Mismatch(_) => "MISMATCH",
            Io(_) => "IO_FAILURE",
            Json(_) => "JSON_FAILURE",
        }
    }
}
