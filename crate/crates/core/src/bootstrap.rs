//! Hierarchical block bootstrap of scaling estimates.
//!
//! Blocks are cut at the finest scale: a block of `block_length` finest
//! atoms covers `2 * block_length` samples along each axis, and every atom
//! of every level belongs to the block containing its first sample. A
//! resample draws blocks with replacement and carries all their atoms
//! (across levels) along, preserving cross-scale dependence.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::{AtomLevel, AtomLevels};
use crate::dwt::CoefficientPyramid;
use crate::error::{invalid_arg, Error, Result};
use crate::leaders::LeaderPyramid;
use crate::regression::RegressionConfig;
use crate::scaling::{
    fit_log_cumulants, fit_scaling_function, hmin_from_table, level_stats_from_logs,
    validate_p_grid, EstimateIntervals, Interval, LevelStats, ScalingEstimate, Source,
    StructureFunctionTable, MAX_CUMULANT_ORDER,
};
use crate::signal::Dim;
use crate::synth::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub resamples: usize,
    /// Block length in finest-level atoms.
    pub block_length: usize,
    pub ci_level: f64,
    pub seed: u64,
}

impl BootstrapConfig {
    /// Defaults with the block length tied to a filter of `order`
    /// (twice its support `2 * order`).
    pub fn for_filter_order(order: usize) -> Self {
        Self {
            resamples: 199,
            block_length: 4 * order.max(1),
            ci_level: 0.9,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resamples < 39 {
            return invalid_arg(format!(
                "at least 39 resamples needed, got {}",
                self.resamples
            ));
        }
        if self.block_length == 0 {
            return invalid_arg("block length must be at least 1");
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return invalid_arg(format!(
                "CI level must lie in (0, 1), got {}",
                self.ci_level
            ));
        }
        Ok(())
    }
}

/// Quantities re-estimated on every resample.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapAnalysis {
    pub p_grid: Vec<f64>,
    pub regression: RegressionConfig,
    pub cumulant_order: usize,
}

/// Point estimates from the full data and percentile intervals from the
/// resamples. `coefficients` drives eta and h_min, `leaders` zeta and the
/// log-cumulants; at least one must be given.
pub fn bootstrap_ci(
    coefficients: Option<&CoefficientPyramid>,
    leaders: Option<&LeaderPyramid>,
    analysis: &BootstrapAnalysis,
    config: &BootstrapConfig,
) -> Result<ScalingEstimate> {
    config.validate()?;
    analysis.regression.validate()?;
    let coef_atoms = coefficients.map(|p| p.atoms());
    let leader_atoms = leaders.map(|l| l.atoms());
    let dim = match (&coef_atoms, &leader_atoms) {
        (Some(a), _) | (None, Some(a)) => a.dim,
        (None, None) => return invalid_arg("bootstrap needs coefficients or leaders"),
    };

    let blocked_coef = coef_atoms
        .as_ref()
        .map(|a| BlockedAtoms::new(a, config.block_length, &analysis.regression))
        .transpose()?;
    let blocked_lead = leader_atoms
        .as_ref()
        .map(|a| BlockedAtoms::new(a, config.block_length, &analysis.regression))
        .transpose()?;
    let n_blocks = blocked_coef
        .as_ref()
        .or(blocked_lead.as_ref())
        .map(|b| b.n_blocks)
        .unwrap_or(0);

    let estimate_on =
        |coef: Option<&LoggedLevels>, lead: Option<&LoggedLevels>| -> Result<ScalingEstimate> {
            let mut est = ScalingEstimate::empty(dim, analysis.p_grid.clone());
            if let Some(atoms) = coef {
                let grid: Vec<f64> = analysis.p_grid.iter().map(|p| p.max(0.0)).collect();
                let table = atoms.table(Source::Coefficients, dim, &grid, 0);
                let fit = fit_scaling_function(&table, &analysis.regression)?;
                let eta = fit
                    .eta
                    .unwrap_or_default()
                    .into_iter()
                    .zip(&analysis.p_grid)
                    .map(|(e, p)| if *p < 0.0 { f64::NAN } else { e })
                    .collect();
                est.eta = Some(eta);
                est.h_min = Some(hmin_from_table(&table, &analysis.regression)?);
            }
            if let Some(atoms) = lead {
                let table = atoms.table(
                    Source::Leaders,
                    dim,
                    &analysis.p_grid,
                    analysis.cumulant_order,
                );
                est.zeta = fit_scaling_function(&table, &analysis.regression)?.zeta;
                if analysis.cumulant_order > 0 {
                    est.cumulants = Some(fit_log_cumulants(
                        &table,
                        analysis.cumulant_order,
                        &analysis.regression,
                    )?);
                }
            }
            Ok(est)
        };

    validate_p_grid(Source::Leaders, &analysis.p_grid)?;
    if analysis.cumulant_order > MAX_CUMULANT_ORDER {
        return invalid_arg(format!("cumulant order exceeds {MAX_CUMULANT_ORDER}"));
    }
    let all: Vec<usize> = (0..n_blocks).collect();
    let mut point = estimate_on(
        blocked_coef.as_ref().map(|x| x.resample(&all)).as_ref(),
        blocked_lead.as_ref().map(|x| x.resample(&all)).as_ref(),
    )?;

    let draws: Vec<Option<ScalingEstimate>> = (0..config.resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(config.seed, b as u64);
            let picks: Vec<usize> = (0..n_blocks)
                .map(|_| rng.random_range(0..n_blocks))
                .collect();
            let coef = blocked_coef.as_ref().map(|x| x.resample(&picks));
            let lead = blocked_lead.as_ref().map(|x| x.resample(&picks));
            estimate_on(coef.as_ref(), lead.as_ref()).ok()
        })
        .collect();
    let ok: Vec<&ScalingEstimate> = draws.iter().flatten().collect();
    if ok.len() * 2 < config.resamples {
        return Err(Error::InsufficientData(format!(
            "only {} of {} resamples could be estimated",
            ok.len(),
            config.resamples
        )));
    }
    if ok.len() < config.resamples {
        log::warn!(
            "{} bootstrap resamples failed and were skipped",
            config.resamples - ok.len()
        );
    }

    let interval = |values: Vec<f64>| percentile_interval(values, config.ci_level, ok.len());
    let per_p = |get: &dyn Fn(&ScalingEstimate) -> Option<&Vec<f64>>| -> Option<Vec<Interval>> {
        get(&point)?;
        Some(
            (0..analysis.p_grid.len())
                .map(|i| {
                    interval(
                        ok.iter()
                            .map(|e| get(e).map_or(f64::NAN, |v| v[i]))
                            .collect(),
                    )
                })
                .collect(),
        )
    };
    let intervals = EstimateIntervals {
        eta: per_p(&|e| e.eta.as_ref()),
        zeta: per_p(&|e| e.zeta.as_ref()),
        h_min: point
            .h_min
            .map(|_| interval(ok.iter().map(|e| e.h_min.unwrap_or(f64::NAN)).collect())),
        cumulants: point.cumulants.as_ref().map(|c| {
            (0..c.c.len())
                .map(|m| {
                    interval(
                        ok.iter()
                            .map(|e| e.cumulants.as_ref().map_or(f64::NAN, |k| k.c[m]))
                            .collect(),
                    )
                })
                .collect()
        }),
    };
    point.integration_order = leaders.map_or(0.0, |l| l.integration_order());
    point.intervals = Some(intervals);
    Ok(point)
}

/// Percentile interval with linear interpolation between order
/// statistics; NaN draws are ignored.
pub fn percentile_interval(mut values: Vec<f64>, level: f64, resamples: usize) -> Interval {
    values.retain(|v| v.is_finite());
    values.sort_by(f64::total_cmp);
    let q = |prob: f64| {
        if values.is_empty() {
            return f64::NAN;
        }
        let pos = prob * (values.len() - 1) as f64;
        let (i, t) = (pos.floor() as usize, pos - pos.floor());
        if i + 1 < values.len() {
            values[i] + t * (values[i + 1] - values[i])
        } else {
            values[i]
        }
    };
    Interval {
        lo: q((1.0 - level) / 2.0),
        hi: q((1.0 + level) / 2.0),
        level,
        resamples,
    }
}

/// Atoms grouped by finest-scale block, per level, stored as
/// `ln |atom|` (`-inf` for zeros).
struct BlockedAtoms {
    n_blocks: usize,
    /// Per level: `j` and, per block id, the log-moduli.
    levels: Vec<(usize, Vec<Vec<f64>>)>,
}

/// One resample: per level, the count of atoms and the log-moduli of the
/// nonzero ones.
struct LoggedLevels(Vec<(usize, usize, Vec<f64>)>);

impl LoggedLevels {
    fn table(
        &self,
        source: Source,
        dim: Dim,
        p_grid: &[f64],
        max_cumulant: usize,
    ) -> StructureFunctionTable {
        let mut levels: Vec<LevelStats> = Vec::new();
        let mut dropped = Vec::new();
        for (j, count, logs) in &self.0 {
            if *count == 0 {
                continue;
            }
            if logs.is_empty() {
                dropped.push(*j);
                continue;
            }
            levels.push(level_stats_from_logs(
                *j,
                *count,
                logs,
                p_grid,
                max_cumulant,
            ));
        }
        StructureFunctionTable {
            source,
            dim,
            p_grid: p_grid.to_vec(),
            levels,
            dropped,
            integration_order: 0.0,
        }
    }
}

/// Block key of an atom with its value.
type KeyedAtom = ([usize; 2], f64);

impl BlockedAtoms {
    fn new(atoms: &AtomLevels, block_length: usize, regression: &RegressionConfig) -> Result<Self> {
        let span = 2 * block_length;
        let key = |j: usize, coord: [usize; 2]| -> [usize; 2] {
            [(coord[0] << j) / span, (coord[1] << j) / span]
        };
        let mut ids: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        let mut keyed: Vec<(usize, Vec<KeyedAtom>)> = Vec::new();
        for AtomLevel { j, values, coords } in &atoms.levels {
            let items: Vec<KeyedAtom> = coords
                .iter()
                .zip(values)
                .map(|(c, v)| (key(*j, *c), *v))
                .collect();
            for (k, _) in &items {
                let next = ids.len();
                ids.entry(*k).or_insert(next);
            }
            if regression.contains(*j) {
                let distinct: BTreeSet<_> = items.iter().map(|(k, _)| *k).collect();
                if distinct.len() < 2 {
                    return Err(Error::InsufficientData(format!(
                        "level {j} spans fewer than 2 bootstrap blocks"
                    )));
                }
            }
            keyed.push((*j, items));
        }
        let n_blocks = ids.len();
        let levels = keyed
            .into_iter()
            .map(|(j, items)| {
                let mut per_block = vec![Vec::new(); n_blocks];
                for (k, v) in items {
                    per_block[ids[&k]].push(v.abs().ln());
                }
                (j, per_block)
            })
            .collect();
        Ok(Self { n_blocks, levels })
    }

    fn resample(&self, picks: &[usize]) -> LoggedLevels {
        LoggedLevels(
            self.levels
                .iter()
                .map(|(j, blocks)| {
                    let mut count = 0;
                    let mut logs = Vec::new();
                    for b in picks {
                        count += blocks[*b].len();
                        logs.extend(blocks[*b].iter().copied().filter(|l| l.is_finite()));
                    }
                    (*j, count, logs)
                })
                .collect(),
        )
    }
}
