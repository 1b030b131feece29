use std::path::PathBuf;

use mutual_shape_core::evolution::EvolutionFailure;

use crate::pgm::PgmError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Numerical failure or degenerate evolution.
    pub const NUMERICAL: i32 = 1;
    /// I/O, file-format, config or argument error.
    pub const IO_OR_USAGE: i32 = 2;
    /// Input masks of different sizes.
    pub const DIM_MISMATCH: i32 = 3;
    /// Fewer than two input masks.
    pub const TOO_FEW_INPUTS: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Pgm {
        path: PathBuf,
        #[source]
        source: PgmError,
    },

    #[error("{}:{line}: {message}", path.display())]
    Config { path: PathBuf, line: usize, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{} is {width}x{height}, expected {expected_width}x{expected_height}", path.display())]
    DimMismatch {
        path: PathBuf,
        width: usize,
        height: usize,
        expected_width: usize,
        expected_height: usize,
    },

    #[error("need at least 2 input masks, got {0}")]
    TooFewInputs(usize),

    #[error("{0}")]
    Evolution(Box<EvolutionFailure>),

    #[error("{0}")]
    Core(#[from] mutual_shape_core::Error),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Io { .. } | AppError::Pgm { .. } | AppError::Config { .. } | AppError::Usage(_) => {
                exit::IO_OR_USAGE
            }
            AppError::DimMismatch { .. } => exit::DIM_MISMATCH,
            AppError::TooFewInputs(_) => exit::TOO_FEW_INPUTS,
            AppError::Evolution(_) => exit::NUMERICAL,
            AppError::Core(mutual_shape_core::Error::InvalidParameter(_)) => exit::IO_OR_USAGE,
            AppError::Core(_) => exit::NUMERICAL,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> AppError {
        let path = path.into();
        move |source| AppError::Io { path, source }
    }
}
