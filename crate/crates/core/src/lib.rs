//! Exact planar Earthmover distance on n×n grids and tori, the Fourier
//! multiplier embedding of zero-mass measures into L1, and an experiment
//! harness that measures the embedding's distortion against exact transport.

pub mod error;
pub mod measures;
pub mod transport;
pub mod fourier;
pub mod embedding;
pub mod bench;

pub use error::{Error, Result};
