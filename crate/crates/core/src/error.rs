use thiserror::Error;

/// Errors raised by the sampling and linear-Gaussian routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate weights: all weights are zero or not finite")]
    DegenerateWeights,
    #[error("reference weight zero: index {index} has zero weight")]
    ReferenceWeightZero { index: usize },
    #[error("index {index} out of range for {len} particles")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("degenerate weight row at time index {time}")]
    DegenerateRow { time: usize },
    #[error("reference potential is zero at time index {time}")]
    ReferencePotentialZero { time: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("matrix is not positive definite ({context})")]
    NotPositiveDefinite { context: &'static str },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(&'static str),
    #[error("invalid blocking sequence: {0}")]
    InvalidBlocking(&'static str),
    #[error("no root found: {0}")]
    NoRoot(&'static str),
    #[error("grid cell {cell} contains more than one event; refine the grid")]
    MultipleEventsInCell { cell: usize },
    #[error("observation at time {time} is not on the grid")]
    OffGridObservation { time: f64 },
    #[error("constant chain: sample variance is zero")]
    ConstantChain,
    #[error("too few runs succeeded: {succeeded} of {requested}")]
    TooFewRuns { succeeded: usize, requested: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
