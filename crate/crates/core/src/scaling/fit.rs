use serde::{Deserialize, Serialize};

use super::{LogCumulants, Source, StructureFunctionTable};
use crate::dwt::CoefficientPyramid;
use crate::error::{invalid_arg, Error, Result};
use crate::regression::RegressionConfig;
use crate::signal::Dim;

/// Two-sided confidence interval from `resamples` bootstrap draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub resamples: usize,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimateIntervals {
    pub eta: Option<Vec<Interval>>,
    pub zeta: Option<Vec<Interval>>,
    pub h_min: Option<Interval>,
    pub cumulants: Option<Vec<Interval>>,
}

/// Scaling exponents over a p grid, plus h_min and log-cumulants when
/// available.
///
/// `eta` comes from coefficients or increments, `zeta` from leaders and
/// `oscillation` from oscillations. Exponents describe the analyzed data,
/// i.e. include any pseudo-fractional integration recorded in
/// `integration_order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingEstimate {
    pub dim: Dim,
    pub p_grid: Vec<f64>,
    pub eta: Option<Vec<f64>>,
    pub zeta: Option<Vec<f64>>,
    pub oscillation: Option<Vec<f64>>,
    pub h_min: Option<f64>,
    pub cumulants: Option<LogCumulants>,
    pub integration_order: f64,
    pub intervals: Option<EstimateIntervals>,
}

impl ScalingEstimate {
    pub fn empty(dim: Dim, p_grid: Vec<f64>) -> Self {
        Self {
            dim,
            p_grid,
            eta: None,
            zeta: None,
            oscillation: None,
            h_min: None,
            cumulants: None,
            integration_order: 0.0,
            intervals: None,
        }
    }

    /// Exponents of the given source, if estimated.
    pub fn exponents(&self, source: Source) -> Option<&[f64]> {
        match source {
            Source::Coefficients | Source::Increments => self.eta.as_deref(),
            Source::Leaders => self.zeta.as_deref(),
            Source::Oscillations => self.oscillation.as_deref(),
        }
    }

    /// Fills every missing field of `self` from `other` (same p grid).
    pub fn merge(mut self, other: ScalingEstimate) -> Result<Self> {
        if self.p_grid != other.p_grid || self.dim != other.dim {
            return invalid_arg("cannot merge estimates over different p grids");
        }
        self.eta = self.eta.or(other.eta);
        self.zeta = self.zeta.or(other.zeta);
        self.oscillation = self.oscillation.or(other.oscillation);
        self.h_min = self.h_min.or(other.h_min);
        self.cumulants = self.cumulants.or(other.cumulants);
        Ok(self)
    }

    /// Exponents of the data before pseudo-fractional integration: `s p`
    /// removed from every scaling function, `s` from `h_min` and `c_1`.
    pub fn deintegrated(&self) -> Self {
        let s = self.integration_order;
        if s == 0.0 {
            return self.clone();
        }
        let shift = |v: &Vec<f64>| -> Vec<f64> {
            v.iter().zip(&self.p_grid).map(|(x, p)| x - s * p).collect()
        };
        let shift_iv = |v: &Vec<Interval>| -> Vec<Interval> {
            v.iter()
                .zip(&self.p_grid)
                .map(|(c, p)| Interval {
                    lo: c.lo - s * p,
                    hi: c.hi - s * p,
                    ..*c
                })
                .collect()
        };
        let move_iv = |c: Interval| Interval {
            lo: c.lo - s,
            hi: c.hi - s,
            ..c
        };
        let cumulants = self.cumulants.as_ref().map(|c| {
            let mut c = c.clone();
            if let Some(c1) = c.c.first_mut() {
                *c1 -= s;
            }
            c
        });
        let intervals = self.intervals.as_ref().map(|iv| EstimateIntervals {
            eta: iv.eta.as_ref().map(shift_iv),
            zeta: iv.zeta.as_ref().map(shift_iv),
            h_min: iv.h_min.map(move_iv),
            cumulants: iv.cumulants.as_ref().map(|c| {
                let mut c = c.clone();
                if let Some(first) = c.first_mut() {
                    *first = move_iv(*first);
                }
                c
            }),
        });
        Self {
            dim: self.dim,
            p_grid: self.p_grid.clone(),
            eta: self.eta.as_ref().map(shift),
            zeta: self.zeta.as_ref().map(shift),
            oscillation: self.oscillation.clone(),
            h_min: self.h_min.map(|h| h - s),
            cumulants,
            integration_order: 0.0,
            intervals,
        }
    }

    /// Indices `i` where the second difference of `values` over the
    /// (possibly uneven) p grid is positive beyond `tol`.
    pub fn concavity_violations(&self, source: Source, tol: f64) -> Vec<usize> {
        let Some(v) = self.exponents(source) else {
            return Vec::new();
        };
        let p = &self.p_grid;
        (1..p.len().saturating_sub(1))
            .filter(|&i| {
                let left = (v[i] - v[i - 1]) / (p[i] - p[i - 1]);
                let right = (v[i + 1] - v[i]) / (p[i + 1] - p[i]);
                right - left > tol
            })
            .collect()
    }

    /// Exponent at `p`, linearly interpolated on the grid, with the
    /// matching interval when bootstrap results are present.
    pub fn value_at(&self, source: Source, p: f64) -> Option<(f64, Option<Interval>)> {
        let values = self.exponents(source)?;
        let ci = self.intervals.as_ref().and_then(|iv| match source {
            Source::Leaders => iv.zeta.as_ref(),
            Source::Coefficients | Source::Increments => iv.eta.as_ref(),
            Source::Oscillations => None,
        });
        let grid = &self.p_grid;
        if let Some(i) = grid.iter().position(|g| *g == p) {
            return Some((values[i], ci.map(|c| c[i])));
        }
        let i = (0..grid.len().saturating_sub(1))
            .find(|&i| (grid[i] < p && p < grid[i + 1]) || (grid[i] > p && p > grid[i + 1]))?;
        let t = (p - grid[i]) / (grid[i + 1] - grid[i]);
        let lerp = |a: f64, b: f64| a + t * (b - a);
        let interval = ci.map(|c| Interval {
            lo: lerp(c[i].lo, c[i + 1].lo),
            hi: lerp(c[i].hi, c[i + 1].hi),
            ..c[i]
        });
        Some((lerp(values[i], values[i + 1]), interval))
    }
}

/// Exponent per p: weighted least-squares slope of `log2 stat` against `j`.
///
/// For negative p, levels with too many zero atoms carry NaN moments and
/// are skipped; if that leaves too few levels the exponent is NaN.
pub fn fit_scaling_function(
    table: &StructureFunctionTable,
    config: &RegressionConfig,
) -> Result<ScalingEstimate> {
    config.validate()?;
    let mut exponents = Vec::with_capacity(table.p_grid.len());
    for (i, &p) in table.p_grid.iter().enumerate() {
        if p == 0.0 {
            exponents.push(0.0);
            continue;
        }
        let points: Vec<(usize, f64, usize)> = table
            .levels
            .iter()
            .map(|l| (l.j, l.log2_moments[i], l.count))
            .collect();
        match config.fit(&points) {
            Ok(fit) => exponents.push(fit.slope),
            Err(Error::InsufficientScales { .. }) if p < 0.0 && has_zero_levels(table, config) => {
                log::warn!("p = {p}: too many zero atoms, exponent left undefined");
                exponents.push(f64::NAN);
            }
            Err(e) => return Err(e),
        }
    }
    let mut est = ScalingEstimate::empty(table.dim, table.p_grid.clone());
    est.integration_order = table.integration_order;
    match table.source {
        Source::Coefficients | Source::Increments => est.eta = Some(exponents),
        Source::Leaders => est.zeta = Some(exponents),
        Source::Oscillations => est.oscillation = Some(exponents),
    }
    Ok(est)
}

fn has_zero_levels(table: &StructureFunctionTable, config: &RegressionConfig) -> bool {
    table
        .levels
        .iter()
        .any(|l| config.contains(l.j) && l.zeros as f64 > super::MAX_ZERO_FRACTION * l.count as f64)
}

/// Slope of `log2 sup |c|` against `j`; levels without a nonzero
/// coefficient are dropped.
pub fn estimate_hmin(pyramid: &CoefficientPyramid, config: &RegressionConfig) -> Result<f64> {
    config.validate()?;
    let mut points = Vec::new();
    for level in pyramid.levels() {
        if !config.contains(level.j) {
            continue;
        }
        let sup = (0..level.len())
            .filter(|&i| level.valid[i])
            .map(|i| level.max_abs_at(i))
            .fold(0.0f64, f64::max);
        if sup > 0.0 {
            points.push((level.j, sup.log2(), level.valid_count()));
        }
    }
    if points.is_empty() {
        return Err(Error::Degenerate(
            "every level in range has only zero coefficients".into(),
        ));
    }
    Ok(config.fit(&points)?.slope)
}

/// Same as [`estimate_hmin`] from a coefficient table.
pub(crate) fn hmin_from_table(
    table: &StructureFunctionTable,
    config: &RegressionConfig,
) -> Result<f64> {
    let points: Vec<(usize, f64, usize)> = table
        .levels
        .iter()
        .filter(|l| l.log2_sup.is_finite())
        .map(|l| (l.j, l.log2_sup, l.count))
        .collect();
    if points.is_empty() {
        return Err(Error::Degenerate("no nonzero coefficient".into()));
    }
    Ok(config.fit(&points)?.slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl Verdict {
    /// `Yes` if the quantity is above `threshold`, `No` if below, judged on
    /// the interval when one is given and strictly otherwise.
    fn above(value: f64, ci: Option<Interval>, threshold: f64) -> Self {
        let (lo, hi) = ci.map_or((value, value), |c| (c.lo, c.hi));
        if lo > threshold {
            Verdict::Yes
        } else if hi < threshold {
            Verdict::No
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub in_bv: Verdict,
    pub in_l2: Verdict,
    pub bounded_quadratic_variation: Verdict,
    pub locally_bounded: Verdict,
}

/// Function-space verdicts from `eta(1)`, `eta(2)`, `zeta(2)` and `h_min`.
///
/// Quadratic variation is only judged when `h_min > 0` is established.
/// Integrated estimates are judged on their de-integrated exponents.
pub fn membership_tests(est: &ScalingEstimate) -> Result<MembershipReport> {
    let est = &est.deintegrated();
    let need = |source: Source, p: f64, name: &str| {
        est.value_at(source, p)
            .ok_or_else(|| Error::IncompleteReport(format!("{name}({p})")))
    };
    let (eta1, eta1_ci) = need(Source::Coefficients, 1.0, "eta")?;
    let (eta2, eta2_ci) = need(Source::Coefficients, 2.0, "eta")?;
    let (zeta2, zeta2_ci) = need(Source::Leaders, 2.0, "zeta")?;
    let h_min = est
        .h_min
        .ok_or_else(|| Error::IncompleteReport("h_min".into()))?;
    let h_ci = est.intervals.as_ref().and_then(|iv| iv.h_min);

    let locally_bounded = Verdict::above(h_min, h_ci, 0.0);
    let quadratic = if locally_bounded == Verdict::Yes {
        Verdict::above(zeta2, zeta2_ci, est.dim.as_f64())
    } else {
        Verdict::Inconclusive
    };
    Ok(MembershipReport {
        in_bv: Verdict::above(eta1, eta1_ci, 1.0),
        in_l2: Verdict::above(eta2, eta2_ci, 0.0),
        bounded_quadratic_variation: quadratic,
        locally_bounded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subordination {
    pub h: f64,
    /// Root of `eta(p) = 1`.
    pub p_root: f64,
    /// Width of the final bisection bracket in H.
    pub bracket_width: f64,
}

/// Solves `eta(1/H) = 1` on the piecewise-linear interpolation of `eta`
/// over the positive part of the grid (first crossing).
pub fn infer_subordination_h(est: &ScalingEstimate) -> Result<Subordination> {
    let eta = est
        .eta
        .as_ref()
        .ok_or_else(|| Error::IncompleteReport("eta".into()))?;
    let mut pts: Vec<(f64, f64)> = est
        .p_grid
        .iter()
        .zip(eta)
        .filter(|(p, _)| **p > 0.0)
        .map(|(p, e)| (*p, *e))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let seg = pts
        .windows(2)
        .find(|w| (w[0].1 - 1.0) * (w[1].1 - 1.0) <= 0.0)
        .ok_or_else(|| Error::NoRoot("eta(p) - 1 does not change sign on the p grid".into()))?;
    let ((p0, e0), (p1, e1)) = (seg[0], seg[1]);
    let f = |p: f64| e0 + (p - p0) / (p1 - p0) * (e1 - e0) - 1.0;
    if f(p0) == 0.0 || f(p1) == 0.0 {
        let p_root = if f(p0) == 0.0 { p0 } else { p1 };
        return Ok(Subordination {
            h: 1.0 / p_root,
            p_root,
            bracket_width: 0.0,
        });
    }
    let (mut a, mut b) = (p0, p1);
    let fa_sign = f(a).signum();
    while b - a > 1e-6 {
        let m = 0.5 * (a + b);
        if f(m).signum() == fa_sign {
            a = m;
        } else {
            b = m;
        }
    }
    let p_root = 0.5 * (a + b);
    Ok(Subordination {
        h: 1.0 / p_root,
        p_root,
        bracket_width: 1.0 / a - 1.0 / b,
    })
}
