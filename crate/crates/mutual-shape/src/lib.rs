//! File formats and the command-line front end for `mutual-shape-core`.
//!
//! Masks are read from and written to PGM graymaps; tables are CSV; every run
//! leaves a `run.cfg` with the resolved parameters so it can be repeated with
//! `--config`.

pub mod app;
pub mod config;
pub mod dump;
pub mod error;
pub mod pgm;
pub mod report;

pub use error::{exit, AppError};
