//! Adaptive-sampling completion of low-rank matrices and tensors.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense containers, orthonormal bases, subsampled least squares
//!   and coherence.
//! - [`instance`]: synthetic ground truth, index-set sampling and the
//!   [`MeasurementOracle`](instance::MeasurementOracle) that meters every
//!   revealed entry.
//! - [`noiseless`]: exact sequential matrix completion and its recursive
//!   tensor generalisation.
//! - [`css`]: adaptive column subset selection for noisy matrices.
//! - [`bounds`]: closed-form sample-complexity, detection and lower-bound
//!   formulas.
//! - [`experiments`]: reproducible sweeps that emit CSV tables and gnuplot
//!   scripts.

pub mod bounds;
pub mod css;
pub mod error;
pub mod experiments;
pub mod instance;
pub mod linalg;
pub mod noiseless;
pub mod seed;

pub use error::{Error, Result};
