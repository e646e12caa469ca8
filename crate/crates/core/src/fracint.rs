//! Pseudo-fractional integration in the wavelet domain.

use crate::dwt::{design_daubechies_filter, CoefficientPyramid, DetailLevel};
use crate::error::{invalid_arg, Result};

/// Multiplies level-`j` coefficients by `2^{s j}`, raising every regularity
/// exponent by `s`. Masks and levels are unchanged; the pyramid records the
/// accumulated order.
pub fn pseudo_fractional_integrate(
    pyramid: &CoefficientPyramid,
    s: f64,
) -> Result<CoefficientPyramid> {
    if !s.is_finite() {
        return invalid_arg(format!("integration order must be finite, got {s}"));
    }
    let levels: Vec<DetailLevel> = pyramid
        .levels()
        .iter()
        .map(|level| {
            let factor = (s * level.j as f64).exp2();
            DetailLevel {
                bands: level
                    .bands
                    .iter()
                    .map(|b| b.iter().map(|c| c * factor).collect())
                    .collect(),
                ..level.clone()
            }
        })
        .collect();
    Ok(pyramid.with_levels(levels, pyramid.integration_order() + s))
}

/// Smallest non-negative multiple of 0.5 making every `h_min + s`
/// strictly positive.
pub fn select_integration_order(hmin_values: &[f64]) -> Result<f64> {
    if hmin_values.is_empty() {
        return invalid_arg("no h_min value given");
    }
    if hmin_values.iter().any(|h| !h.is_finite()) {
        return invalid_arg("h_min values must be finite");
    }
    let min = hmin_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        return Ok(0.0);
    }
    Ok(0.5 * ((-min / 0.5).floor() + 1.0))
}

/// Warning text when the wavelet of `filter_order` is not regular enough
/// for integration of order `s` (needs regularity above `s + 1`).
pub fn regularity_warning(filter_order: usize, s: f64) -> Option<String> {
    let r = design_daubechies_filter(filter_order).ok()?.regularity();
    (r <= s + 1.0).then(|| {
        format!(
            "wavelet of order {filter_order} has regularity {r:.2}, at most s + 1 = {:.2}",
            s + 1.0
        )
    })
}
