//! Wavelet-leader multifractal analysis of 1D signals and 2D images.

pub mod atoms;
pub mod bootstrap;
pub mod dwt;
pub mod error;
pub mod fracint;
pub mod geometry;
pub mod io;
pub mod leaders;
pub mod pipeline;
pub mod regression;
pub mod scaling;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use signal::{Dim, Signal};
