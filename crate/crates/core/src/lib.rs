//! Potential-field trajectory toolkit: core numerics.
//!
//! Trajectories are turned into sparse potential labels, rasterized into
//! dense scalar fields, converted into direction/speed/force fields and
//! rolled out recurrently into single- and multi-modal predictions.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the
//! evaluation protocol runner and the command line live in the `potfield`
//! companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod estimators;
pub mod geometry;
pub mod grid;
pub mod labeling;
pub mod metrics;
pub mod predictor;
pub mod seed;
pub mod trajectory;
pub mod vec2;

pub use error::{Error, Result};
pub use grid::{GridSpec, ScalarField, VectorField};
pub use vec2::Vec2;

/// Off-band weight of the training mask.
pub const LAMBDA: f32 = 0.01;
