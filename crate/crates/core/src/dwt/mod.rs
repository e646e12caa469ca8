//! Daubechies filter design and the fast wavelet transform.
//!
//! Levels are indexed `j = 1..=J` from the finest scale: level `j` of an
//! axis of length `n` holds `n / 2^j` positions and its wavelets span
//! about `2^j` samples. Detail coefficients are stored in the L1
//! normalization, i.e. `2^{-d j / 2}` times the orthonormal transform
//! output, so that a function with `|f(x+h) - f(x)| ~ |h|^H` has
//! coefficients growing like `2^{H j}`.

mod filter;
mod pyramid;
mod transform;

pub use filter::{design_daubechies_filter, WaveletFilter};
pub use pyramid::{CoarseBand, CoefficientPyramid, DetailLevel};
pub use transform::{dwt_forward, max_level_for, Boundary};
