//! Consensus ("mutual") shape estimation from several binary segmentations
//! of the same object.
//!
//! A level-set active contour is evolved so that the region it encloses
//! minimizes, summed over the inputs, the joint entropy of (input label,
//! consensus label) plus the conditional entropy of the input label given
//! the consensus label. Each input's sensitivity and specificity are
//! re-estimated from the current contour at every iteration, which gives a
//! ranking of the inputs without any gold standard.
//!
//! The crate is `no_std` (it needs `alloc`) and does no I/O. File formats and
//! the command-line front end live in the `mutual-shape` crate.
//!
//! Baselines for comparison are in [`baselines`]: majority vote, union,
//! intersection and a binary STAPLE expectation-maximization.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod criterion;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod levelset;
pub mod synthetic;
pub mod velocity;

pub use error::{Error, Result};
pub use grid::{BinaryMask, RasterGrid, ShapeSet};
pub use levelset::{ContourBand, LevelSetField};
