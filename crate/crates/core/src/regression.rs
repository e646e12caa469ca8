//! Weighted least-squares lines for log-log scaling fits.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

/// Weighted least-squares fit of `y = intercept + slope * x`.
///
/// Uniform weights when `weights` is `None`. Callers guarantee at least two
/// distinct abscissae.
pub fn weighted_slope(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> LineFit {
    debug_assert_eq!(xs.len(), ys.len());
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for i in 0..xs.len() {
        sw += w(i);
        sx += w(i) * xs[i];
        sy += w(i) * ys[i];
    }
    let (mx, my) = (sx / sw, sy / sw);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for i in 0..xs.len() {
        let dx = xs[i] - mx;
        sxx += w(i) * dx * dx;
        sxy += w(i) * dx * (ys[i] - my);
    }
    let slope = sxy / sxx;
    LineFit {
        slope,
        intercept: my - slope * mx,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Uniform,
    ByCount,
}

impl std::str::FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Weighting::Uniform),
            "by_count" | "count" => Ok(Weighting::ByCount),
            other => invalid_arg(format!("unknown weighting '{other}'")),
        }
    }
}

/// Range of levels and weighting used by every scaling regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegressionConfig {
    pub j1: usize,
    pub j2: usize,
    pub weighting: Weighting,
    pub min_atoms: usize,
}

impl RegressionConfig {
    pub fn new(j1: usize, j2: usize) -> Result<Self> {
        let cfg = Self {
            j1,
            j2,
            weighting: Weighting::ByCount,
            min_atoms: 8,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_weighting(mut self, weighting: Weighting) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn with_min_atoms(mut self, min_atoms: usize) -> Self {
        self.min_atoms = min_atoms;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.j1 == 0 || self.j1 >= self.j2 {
            return invalid_arg(format!(
                "scale range requires 1 <= j1 < j2, got ({}, {})",
                self.j1, self.j2
            ));
        }
        Ok(())
    }

    pub fn contains(&self, j: usize) -> bool {
        (self.j1..=self.j2).contains(&j)
    }

    /// Fits `y` against `j` over the configured range, keeping levels with
    /// finite values and at least `min_atoms` atoms. Points are
    /// `(j, value, count)`.
    pub fn fit(&self, points: &[(usize, f64, usize)]) -> Result<LineFit> {
        let kept: Vec<&(usize, f64, usize)> = points
            .iter()
            .filter(|(j, v, n)| self.contains(*j) && v.is_finite() && *n >= self.min_atoms)
            .collect();
        if kept.len() < 3 {
            return Err(Error::InsufficientScales {
                available: kept.len(),
                required: 3,
            });
        }
        let xs: Vec<f64> = kept.iter().map(|p| p.0 as f64).collect();
        let ys: Vec<f64> = kept.iter().map(|p| p.1).collect();
        let ws: Vec<f64> = kept.iter().map(|p| p.2 as f64).collect();
        let weights = match self.weighting {
            Weighting::Uniform => None,
            Weighting::ByCount => Some(ws.as_slice()),
        };
        Ok(weighted_slope(&xs, &ys, weights))
    }
}
