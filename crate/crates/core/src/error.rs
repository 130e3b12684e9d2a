use std::io;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("matrix shape inconsistent with fold target: {0}")]
    ShapeInconsistent(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid tensor dims: {0}")]
    BadDims(String),

    #[error("bad magic bytes: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },

    #[error("truncated file: {0}")]
    TruncatedFile(String),

    #[error("tensor dims disagree with header: {0}")]
    DimsMismatch(String),

    #[error("label {label} outside 1..={class_count}")]
    LabelOutOfRange { label: u32, class_count: u32 },

    #[error("class {0} has no samples")]
    EmptyClass(u32),

    #[error("class {class} has {count} samples, fewer than {folds} folds")]
    TooFewSamples { class: u32, count: usize, folds: usize },

    #[error("gabor kernel size must be odd and positive, got {0}")]
    BadKernel(usize),

    #[error("symmetric eigendecomposition did not converge")]
    EigenFailure,

    #[error("objective increased for {0} consecutive steps under fixed step size")]
    StepSizeDiverged(usize),

    #[error("neighbor graph has no same-class edges; nothing to learn")]
    DegenerateGraph,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed model file: {0}")]
    BadModel(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
