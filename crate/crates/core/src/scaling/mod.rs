//! Structure functions, scaling exponents, log-cumulants and Legendre
//! spectra.
//!
//! Levels are numbered from the finest (`j = 1`) upward, so every exponent
//! is the slope of a log2 statistic against `j`: a quantity that scales as
//! `(2^j)^a` has exponent `a`.

mod atoms;
mod cumulants;
mod fit;
mod legendre;

pub use atoms::{increment_atoms, oscillation_atoms};
pub use cumulants::{estimate_log_cumulants, fit_log_cumulants, k_statistics, LogCumulants};
pub use fit::{
    estimate_hmin, fit_scaling_function, infer_subordination_h, membership_tests,
    EstimateIntervals, Interval, MembershipReport, ScalingEstimate, Subordination, Verdict,
};
pub use legendre::{legendre_spectrum, legendre_transform, linear_grid, LegendreSpectrum};

pub(crate) use fit::hmin_from_table;

use serde::{Deserialize, Serialize};

use crate::atoms::AtomLevels;
use crate::dwt::CoefficientPyramid;
use crate::error::{invalid_arg, Result};
use crate::leaders::LeaderPyramid;
use crate::regression::RegressionConfig;
use crate::signal::{Dim, Signal};

/// Fraction of zero atoms above which a level is unusable for `p < 0`.
pub const MAX_ZERO_FRACTION: f64 = 0.1;

/// Maximal cumulant order.
pub const MAX_CUMULANT_ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Coefficients,
    Leaders,
    Increments,
    Oscillations,
}

impl Source {
    pub fn allows_negative_p(self) -> bool {
        !matches!(self, Source::Coefficients)
    }
}

/// Input of [`structure_functions`].
#[derive(Debug, Clone, Copy)]
pub enum Atoms<'a> {
    Coefficients(&'a CoefficientPyramid),
    Leaders(&'a LeaderPyramid),
    /// Increments of order `order` at lags `2^j`, `j = 1..=max_level`.
    Increments {
        signal: &'a Signal,
        order: usize,
        max_level: usize,
    },
    /// Oscillations over dyadic cubes of side `2^j` samples.
    Oscillations {
        signal: &'a Signal,
        second_order: bool,
        max_level: usize,
    },
}

/// Per-level statistics of one structure-function table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub j: usize,
    /// Valid atoms, zeros included.
    pub count: usize,
    /// Zero atoms, excluded from negative moments and log statistics.
    pub zeros: usize,
    /// `log2` of the mean of `|atom|^p`, one entry per p; NaN where the
    /// moment is unavailable.
    pub log2_moments: Vec<f64>,
    /// `log2` of the largest atom modulus.
    pub log2_sup: f64,
    /// k-statistics `C_m(j)` of `ln |atom|`, `m = 1..=M`; NaN when the
    /// level holds too few nonzero atoms.
    pub cumulants: Vec<f64>,
}

impl LevelStats {
    pub fn nonzero(&self) -> usize {
        self.count - self.zeros
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureFunctionTable {
    pub source: Source,
    pub dim: Dim,
    pub p_grid: Vec<f64>,
    pub levels: Vec<LevelStats>,
    /// Levels left out because every atom was zero.
    pub dropped: Vec<usize>,
    pub integration_order: f64,
}

impl StructureFunctionTable {
    pub fn level(&self, j: usize) -> Option<&LevelStats> {
        self.levels.iter().find(|l| l.j == j)
    }

    pub fn max_cumulant(&self) -> usize {
        self.levels.first().map_or(0, |l| l.cumulants.len())
    }
}

/// Builds the table of log2 moments, sup and log-cumulants per level.
pub fn structure_functions(
    atoms: Atoms<'_>,
    p_grid: &[f64],
    max_cumulant: usize,
) -> Result<StructureFunctionTable> {
    let (source, levels, integration_order) = match atoms {
        Atoms::Coefficients(p) => (Source::Coefficients, p.atoms(), p.integration_order()),
        Atoms::Leaders(l) => (Source::Leaders, l.atoms(), l.integration_order()),
        Atoms::Increments {
            signal,
            order,
            max_level,
        } => (
            Source::Increments,
            increment_atoms(signal, order, max_level)?,
            0.0,
        ),
        Atoms::Oscillations {
            signal,
            second_order,
            max_level,
        } => (
            Source::Oscillations,
            oscillation_atoms(signal, second_order, max_level)?,
            0.0,
        ),
    };
    let mut table = structure_functions_from_atoms(source, &levels, p_grid, max_cumulant)?;
    table.integration_order = integration_order;
    Ok(table)
}

/// Same as [`structure_functions`] on already extracted atoms; used by the
/// bootstrap on resampled atoms.
pub fn structure_functions_from_atoms(
    source: Source,
    atoms: &AtomLevels,
    p_grid: &[f64],
    max_cumulant: usize,
) -> Result<StructureFunctionTable> {
    validate_p_grid(source, p_grid)?;
    if max_cumulant > MAX_CUMULANT_ORDER {
        return invalid_arg(format!(
            "cumulant order {max_cumulant} exceeds {MAX_CUMULANT_ORDER}"
        ));
    }
    let mut levels = Vec::new();
    let mut dropped = Vec::new();
    for level in &atoms.levels {
        if level.is_empty() {
            continue;
        }
        let stats = level_stats(level.j, &level.values, p_grid, max_cumulant);
        if stats.zeros == stats.count {
            log::warn!("level {} has only zero atoms and is dropped", level.j);
            dropped.push(level.j);
            continue;
        }
        levels.push(stats);
    }
    Ok(StructureFunctionTable {
        source,
        dim: atoms.dim,
        p_grid: p_grid.to_vec(),
        levels,
        dropped,
        integration_order: 0.0,
    })
}

pub(crate) fn validate_p_grid(source: Source, p_grid: &[f64]) -> Result<()> {
    if p_grid.is_empty() {
        return invalid_arg("empty p grid");
    }
    if p_grid.iter().any(|p| !p.is_finite()) {
        return invalid_arg("p grid contains non-finite values");
    }
    if !source.allows_negative_p() && p_grid.iter().any(|p| *p < 0.0) {
        return invalid_arg("negative p is not available for wavelet coefficients");
    }
    Ok(())
}

pub(crate) fn level_stats(
    j: usize,
    values: &[f64],
    p_grid: &[f64],
    max_cumulant: usize,
) -> LevelStats {
    let logs: Vec<f64> = values
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| v.abs().ln())
        .collect();
    level_stats_from_logs(j, values.len(), &logs, p_grid, max_cumulant)
}

/// Same as [`level_stats`] from `ln |atom|` of the nonzero atoms among
/// `count`.
pub(crate) fn level_stats_from_logs(
    j: usize,
    count: usize,
    logs: &[f64],
    p_grid: &[f64],
    max_cumulant: usize,
) -> LevelStats {
    let nonzero = logs.len();
    let zeros = count - nonzero;
    let zero_ok = zeros as f64 <= MAX_ZERO_FRACTION * count as f64;

    let log2_moments = p_grid
        .iter()
        .map(|&p| {
            if p == 0.0 {
                0.0
            } else if p < 0.0 && !zero_ok {
                f64::NAN
            } else {
                let denom = if p > 0.0 { count } else { nonzero };
                log2_mean_exp(logs, p, denom)
            }
        })
        .collect();
    let log2_sup = logs.iter().fold(f64::NEG_INFINITY, |m, l| m.max(*l)) / std::f64::consts::LN_2;
    let cumulants = if nonzero > max_cumulant {
        k_statistics(logs, max_cumulant)
    } else {
        vec![f64::NAN; max_cumulant]
    };
    LevelStats {
        j,
        count,
        zeros,
        log2_moments,
        log2_sup,
        cumulants,
    }
}

/// `log2( sum exp(p * l) / denom )`, shifted by the largest exponent to
/// stay finite for large |p|.
fn log2_mean_exp(logs: &[f64], p: f64, denom: usize) -> f64 {
    if logs.is_empty() || denom == 0 {
        return f64::NAN;
    }
    let shift = logs.iter().map(|l| p * l).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (p * l - shift).exp()).sum();
    (shift + sum.ln() - (denom as f64).ln()) / std::f64::consts::LN_2
}

/// Partition exponents of a nonnegative mass sequence: slope of
/// `log2 sum_I mu(I)^q` against `j`, the boxes `I` aggregating `2^j`
/// consecutive masses (a trailing incomplete box is dropped). Boxes of
/// zero mass are skipped for `q <= 0`; levels without positive mass give
/// NaN.
pub fn partition_exponents(
    masses: &[f64],
    q_grid: &[f64],
    config: &RegressionConfig,
) -> Result<Vec<f64>> {
    config.validate()?;
    if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(crate::error::Error::InvalidData(
            "masses must be finite and non-negative".into(),
        ));
    }
    let mut level = masses.to_vec();
    let mut sums: Vec<(usize, Vec<f64>, usize)> = Vec::new();
    for j in 1..=config.j2 {
        level = level.chunks_exact(2).map(|c| c[0] + c[1]).collect();
        if level.is_empty() {
            break;
        }
        if config.contains(j) {
            let logs: Vec<f64> = level.iter().filter(|m| **m > 0.0).map(|m| m.ln()).collect();
            let row = q_grid.iter().map(|&q| log2_mean_exp(&logs, q, 1)).collect();
            sums.push((j, row, level.len()));
        }
    }
    q_grid
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let points: Vec<(usize, f64, usize)> =
                sums.iter().map(|(j, row, n)| (*j, row[i], *n)).collect();
            config.with_min_atoms(1).fit(&points).map(|f| f.slope)
        })
        .collect()
}
