use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid dimensions must be at least 1x1, got {width}x{height}")]
    EmptyGrid { width: usize, height: usize },

    #[error("expected {expected} samples for the grid, got {actual}")]
    SampleCount { expected: usize, actual: usize },

    #[error("grid mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    GridMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("mask value {value} at pixel {index} is not 0 or 1")]
    NonBinary { index: usize, value: u8 },

    #[error("operation needs at least {needed} masks, got {got}")]
    TooFewMasks { needed: usize, got: usize },

    #[error("degenerate region: {0}")]
    DegenerateRegion(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("statistics are stale: computed for another contour state")]
    StaleStatistics,

    #[error("contour vanished at iteration {iteration} (area {area})")]
    DegenerateEvolution { iteration: usize, area: usize },

    #[error("non-finite velocity at iteration {iteration}")]
    NonFinite { iteration: usize },
}
