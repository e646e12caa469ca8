use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeierstrassVariant {
    /// `sum_k a^{-kH} sin(a^k x)`, `0 < H < 1`.
    Sin,
    /// `sum_k a^{-kH} (1 - cos(a^k x))`, `0 < H < 2`.
    CosRenorm,
}

/// Truncation tolerance on the omitted tails (absolute, for `|x| <= 1`).
const TAIL_TOL: f64 = 1e-17;

/// Index range `k_lo..=k_hi` whose omitted tails are below [`TAIL_TOL`] for
/// `|x| <= 1`: geometric bounds `a^{-kH}` for high frequencies and
/// `a^{k(1-H)} |x|` (sin) or `a^{k(2-H)} x^2 / 2` (cos) for low ones.
pub(crate) fn truncation(a: f64, h: f64, variant: WeierstrassVariant) -> (i64, i64) {
    let ln_a = a.ln();
    let hi_ratio = (-h * ln_a).exp();
    // a^{-(K+1)H} / (1 - a^{-H}) < tol
    let k_hi = ((TAIL_TOL * (1.0 - hi_ratio)).ln() / (-h * ln_a)).ceil() as i64;
    let e = match variant {
        WeierstrassVariant::Sin => 1.0 - h,
        WeierstrassVariant::CosRenorm => 2.0 - h,
    };
    let lo_ratio = (-e * ln_a).exp();
    // a^{(K-1)e} / (1 - a^{-e}) < tol
    let k_lo = ((TAIL_TOL * (1.0 - lo_ratio)).ln() / (e * ln_a)).floor() as i64;
    (k_lo, k_hi)
}

pub(crate) fn term(a: f64, h: f64, k: i64, x: f64, variant: WeierstrassVariant) -> f64 {
    let f = a.powi(k as i32);
    let amp = f.powf(-h);
    match variant {
        WeierstrassVariant::Sin => amp * (f * x).sin(),
        WeierstrassVariant::CosRenorm => amp * (1.0 - (f * x).cos()),
    }
}

/// Deterministic Weierstrass–Mandelbrot function sampled at `x_i = i/n`.
pub fn weierstrass(a: f64, h: f64, n: usize, variant: WeierstrassVariant) -> Result<Vec<f64>> {
    if !(a > 1.0 && a.is_finite()) {
        return invalid_arg(format!("a must be > 1, got {a}"));
    }
    let h_max = match variant {
        WeierstrassVariant::Sin => 1.0,
        WeierstrassVariant::CosRenorm => 2.0,
    };
    if !(h > 0.0 && h < h_max) {
        return invalid_arg(format!(
            "H must lie in (0, {h_max}) for this variant, got {h}"
        ));
    }
    if n < 2 {
        return invalid_arg("length must be at least 2");
    }
    let (k_lo, k_hi) = truncation(a, h, variant);
    Ok((0..n)
        .map(|i| {
            let x = i as f64 / n as f64;
            (k_lo..=k_hi).map(|k| term(a, h, k, x, variant)).sum()
        })
        .collect())
}
