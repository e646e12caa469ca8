use serde::{Deserialize, Serialize};

use super::ScalingEstimate;
use crate::error::{invalid_arg, Error, Result};

/// Sampled Legendre spectrum `L(h) = min_p (d + h p - zeta(p))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreSpectrum {
    pub h: Vec<f64>,
    pub l: Vec<f64>,
    /// Minimizing p for each h.
    pub p_star: Vec<f64>,
    /// `L(h) < 0`: empty set, reported but flagged.
    pub negative: Vec<bool>,
    /// Support estimates from the end slopes of zeta: `zeta'(p_max)` and
    /// `zeta'(p_min)` (the latter needs negative p).
    pub h_support: (Option<f64>, Option<f64>),
    pub warnings: Vec<String>,
}

impl LegendreSpectrum {
    pub fn max(&self) -> f64 {
        self.l.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Centre of the set of h where L is maximal.
    pub fn argmax_h(&self) -> f64 {
        let m = self.max();
        let on_top: Vec<f64> = self
            .h
            .iter()
            .zip(&self.l)
            .filter(|(_, l)| **l >= m - 1e-12)
            .map(|(h, _)| *h)
            .collect();
        0.5 * (on_top[0] + on_top[on_top.len() - 1])
    }

    /// Linear interpolation of L at `h` inside the sampled range.
    pub fn at(&self, h: f64) -> Option<f64> {
        let i = self.h.windows(2).position(|w| w[0] <= h && h <= w[1])?;
        let t = (h - self.h[i]) / (self.h[i + 1] - self.h[i]);
        Some(self.l[i] + t * (self.l[i + 1] - self.l[i]))
    }
}

/// Discrete Legendre transform of `zeta` sampled on `p_grid`.
///
/// The `p = 0` term (`zeta(0) = 0`) is always included, so `L <= d`.
/// Ties are broken toward smaller `|p|`.
pub fn legendre_transform(
    p_grid: &[f64],
    zeta: &[f64],
    d: f64,
    h_grid: &[f64],
) -> Result<LegendreSpectrum> {
    if p_grid.len() != zeta.len() || p_grid.is_empty() {
        return invalid_arg("p grid and scaling function lengths differ");
    }
    if h_grid.is_empty() || h_grid.windows(2).any(|w| w[0] >= w[1]) {
        return invalid_arg("h grid must be non-empty and strictly increasing");
    }
    if zeta.iter().any(|z| !z.is_finite()) {
        return Err(Error::Degenerate(
            "scaling function has non-finite values".into(),
        ));
    }
    let mut warnings = Vec::new();
    if p_grid.iter().all(|p| *p >= 0.0) {
        let msg = "p grid has no negative values: decreasing branch of the spectrum unavailable";
        log::warn!("{msg}");
        warnings.push(msg.to_string());
    }

    let mut pairs: Vec<(f64, f64)> = p_grid.iter().cloned().zip(zeta.iter().cloned()).collect();
    if !pairs.iter().any(|(p, _)| *p == 0.0) {
        pairs.push((0.0, 0.0));
    }
    pairs.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(a.0.total_cmp(&b.0)));

    let mut l = Vec::with_capacity(h_grid.len());
    let mut p_star = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let (mut best, mut arg) = (f64::INFINITY, 0.0);
        for &(p, z) in &pairs {
            let v = d + h * p - z;
            if v < best {
                best = v;
                arg = p;
            }
        }
        l.push(best);
        p_star.push(arg);
    }

    let mut sorted = pairs.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let slope = |a: (f64, f64), b: (f64, f64)| (b.1 - a.1) / (b.0 - a.0);
    let lower = (n >= 2 && sorted[n - 1].0 > 0.0).then(|| slope(sorted[n - 2], sorted[n - 1]));
    let upper = (n >= 2 && sorted[0].0 < 0.0).then(|| slope(sorted[0], sorted[1]));

    Ok(LegendreSpectrum {
        h: h_grid.to_vec(),
        negative: l.iter().map(|v| *v < 0.0).collect(),
        l,
        p_star,
        h_support: (lower, upper),
        warnings,
    })
}

/// Legendre spectrum of the leader scaling function of an estimate.
/// Negative p without an estimate (too many zero leaders) are skipped.
pub fn legendre_spectrum(est: &ScalingEstimate, h_grid: &[f64]) -> Result<LegendreSpectrum> {
    let zeta = est
        .zeta
        .as_ref()
        .ok_or_else(|| Error::IncompleteReport("zeta".into()))?;
    let (p, z): (Vec<f64>, Vec<f64>) = est
        .p_grid
        .iter()
        .zip(zeta)
        .filter(|(p, z)| z.is_finite() || **p >= 0.0)
        .map(|(p, z)| (*p, *z))
        .unzip();
    let dropped = est.p_grid.len() - p.len();
    let mut spectrum = legendre_transform(&p, &z, est.dim.as_f64(), h_grid)?;
    if dropped > 0 {
        spectrum.warnings.push(format!(
            "{dropped} negative p value(s) without an estimate left out of the transform"
        ));
    }
    Ok(spectrum)
}

/// Evenly spaced grid from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}
