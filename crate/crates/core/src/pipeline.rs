//! End-to-end analysis: transform, optional pseudo-fractional integration,
//! leaders, structure functions, fits, spectrum, memberships, bootstrap.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bootstrap::{bootstrap_ci, BootstrapAnalysis, BootstrapConfig};
use crate::dwt::{
    design_daubechies_filter, dwt_forward, max_level_for, Boundary, CoefficientPyramid,
};
use crate::error::{invalid_arg, Error, Result};
use crate::fracint::{pseudo_fractional_integrate, regularity_warning, select_integration_order};
use crate::leaders::compute_leaders;
use crate::regression::{RegressionConfig, Weighting};
use crate::scaling::{
    estimate_hmin, fit_log_cumulants, fit_scaling_function, legendre_spectrum, linear_grid,
    membership_tests, structure_functions, Atoms, LegendreSpectrum, MembershipReport,
    ScalingEstimate, Source, StructureFunctionTable, MAX_CUMULANT_ORDER,
};
use crate::signal::{Dim, Signal};

/// Pseudo-fractional integration policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FracintMode {
    Off,
    /// Smallest multiple of 0.5 making `h_min` positive.
    Auto,
    Fixed(f64),
}

impl FromStr for FracintMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "off" => Ok(FracintMode::Off),
            "auto" => Ok(FracintMode::Auto),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(FracintMode::Fixed)
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "fracint must be 'off', 'auto' or a number, got '{other}'"
                    ))
                }),
        }
    }
}

impl fmt::Display for FracintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FracintMode::Off => write!(f, "off"),
            FracintMode::Auto => write!(f, "auto"),
            FracintMode::Fixed(s) => write!(f, "{s}"),
        }
    }
}

impl Serialize for FracintMode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FracintMode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(FracintMode::Fixed(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Analysis parameters; flat so that it maps onto a single config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub filter_order: usize,
    pub boundary: Boundary,
    /// Deepest level; the largest allowed by the data when absent.
    pub max_level: Option<usize>,
    pub j1: usize,
    /// Coarsest fitted level; `max_level` when absent.
    pub j2: Option<usize>,
    pub weighting: Weighting,
    pub min_atoms: usize,
    pub p_grid: Vec<f64>,
    pub h_lo: f64,
    pub h_hi: f64,
    pub h_count: usize,
    pub cumulant_order: usize,
    pub fracint: FracintMode,
    pub bootstrap: bool,
    pub resamples: usize,
    /// Bootstrap block length in finest atoms; twice the filter support
    /// when absent.
    pub block_length: Option<usize>,
    pub ci_level: f64,
    pub seed: u64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            filter_order: 3,
            boundary: Boundary::Discard,
            max_level: None,
            j1: 3,
            j2: None,
            weighting: Weighting::ByCount,
            min_atoms: 8,
            p_grid: (-20..=20).map(|i| f64::from(i) * 0.25).collect(),
            h_lo: -0.5,
            h_hi: 2.5,
            h_count: 601,
            cumulant_order: 3,
            fracint: FracintMode::Auto,
            bootstrap: false,
            resamples: 199,
            block_length: None,
            ci_level: 0.9,
            seed: 0,
        }
    }
}

impl AnalysisConfig {
    pub fn h_grid(&self) -> Vec<f64> {
        linear_grid(self.h_lo, self.h_hi, self.h_count)
    }

    /// Deepest level and regression range for data of the given shortest
    /// axis.
    pub fn resolve_levels(&self, min_axis: usize) -> Result<(usize, RegressionConfig)> {
        let deepest = max_level_for(min_axis);
        let max_level = self.max_level.unwrap_or(deepest);
        if max_level == 0 || max_level > deepest {
            return invalid_arg(format!(
                "max_level must be in 1..={deepest} for axis length {min_axis}, got {max_level}"
            ));
        }
        let j2 = self.j2.unwrap_or(max_level);
        if j2 > max_level {
            return invalid_arg(format!("j2 = {j2} exceeds the deepest level {max_level}"));
        }
        let regression = RegressionConfig::new(self.j1, j2)?
            .with_weighting(self.weighting)
            .with_min_atoms(self.min_atoms);
        Ok((max_level, regression))
    }

    pub fn bootstrap_config(&self) -> BootstrapConfig {
        let mut b = BootstrapConfig::for_filter_order(self.filter_order);
        b.resamples = self.resamples;
        b.ci_level = self.ci_level;
        b.seed = self.seed;
        if let Some(l) = self.block_length {
            b.block_length = l;
        }
        b
    }

    pub fn validate(&self) -> Result<()> {
        design_daubechies_filter(self.filter_order)?;
        if let Some(j2) = self.j2 {
            RegressionConfig::new(self.j1, j2)?;
        } else if self.j1 == 0 {
            return invalid_arg("j1 must be at least 1");
        }
        if self.p_grid.is_empty() || self.p_grid.iter().any(|p| !p.is_finite()) {
            return invalid_arg("p grid must be non-empty and finite");
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return invalid_arg("p grid must be strictly increasing");
        }
        if !(self.h_lo.is_finite() && self.h_hi.is_finite())
            || self.h_lo >= self.h_hi
            || self.h_count < 2
        {
            return invalid_arg("h grid needs h_lo < h_hi and at least 2 points");
        }
        if self.cumulant_order > MAX_CUMULANT_ORDER {
            return invalid_arg(format!(
                "cumulant order must be at most {MAX_CUMULANT_ORDER}"
            ));
        }
        if let FracintMode::Fixed(s) = self.fracint {
            if !s.is_finite() {
                return invalid_arg("integration order must be finite");
            }
        }
        if self.bootstrap {
            self.bootstrap_config().validate()?;
        }
        Ok(())
    }
}

/// A stage that failed after the core estimates were obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analysis {
    pub shape: [usize; 2],
    pub max_level: usize,
    pub regression: RegressionConfig,
    /// Slope of the coefficient suprema before integration.
    pub h_min_raw: f64,
    pub integration_order: f64,
    /// Exponents of the analyzed (possibly integrated) data; intervals when
    /// bootstrapped.
    pub estimate: ScalingEstimate,
    pub coefficient_table: StructureFunctionTable,
    pub leader_table: StructureFunctionTable,
    pub spectrum: Option<LegendreSpectrum>,
    pub memberships: Option<MembershipReport>,
    pub warnings: Vec<String>,
    pub failures: Vec<StageFailure>,
}

/// Runs the full analysis of one signal or image.
pub fn analyze(signal: &Signal, config: &AnalysisConfig) -> Result<Analysis> {
    config.validate()?;
    let mut warnings = Vec::new();
    let mut failures = Vec::new();
    let (max_level, regression) = config.resolve_levels(signal.min_axis())?;

    let filter = design_daubechies_filter(config.filter_order).map_err(|e| e.in_stage("dwt"))?;
    let pyramid =
        dwt_forward(signal, &filter, max_level, config.boundary).map_err(|e| e.in_stage("dwt"))?;
    check_coefficients(signal, &pyramid).map_err(|e| e.in_stage("dwt"))?;
    let h_min_raw = estimate_hmin(&pyramid, &regression).map_err(|e| e.in_stage("hmin"))?;

    let s = match config.fracint {
        FracintMode::Off => 0.0,
        FracintMode::Auto => {
            select_integration_order(&[h_min_raw]).map_err(|e| e.in_stage("fracint"))?
        }
        FracintMode::Fixed(s) => s,
    };
    let pyramid = if s != 0.0 {
        warnings.extend(regularity_warning(config.filter_order, s));
        pseudo_fractional_integrate(&pyramid, s).map_err(|e| e.in_stage("fracint"))?
    } else {
        pyramid
    };

    let leaders = compute_leaders(&pyramid).map_err(|e| e.in_stage("leaders"))?;

    let positive: Vec<f64> = config.p_grid.iter().map(|p| p.max(0.0)).collect();
    let coefficient_table = structure_functions(Atoms::Coefficients(&pyramid), &positive, 0)
        .map_err(|e| e.in_stage("structure_functions"))?;
    let leader_table = structure_functions(
        Atoms::Leaders(&leaders),
        &config.p_grid,
        config.cumulant_order,
    )
    .map_err(|e| e.in_stage("structure_functions"))?;

    let eta = fit_scaling_function(&coefficient_table, &regression)
        .map_err(|e| e.in_stage("fits"))?
        .eta
        .unwrap_or_default()
        .into_iter()
        .zip(&config.p_grid)
        .map(|(e, p)| if *p < 0.0 { f64::NAN } else { e })
        .collect();
    let mut estimate =
        fit_scaling_function(&leader_table, &regression).map_err(|e| e.in_stage("fits"))?;
    estimate.eta = Some(eta);
    estimate.h_min = Some(h_min_raw + s);
    estimate.integration_order = s;
    if config.cumulant_order > 0 {
        estimate.cumulants = Some(
            fit_log_cumulants(&leader_table, config.cumulant_order, &regression)
                .map_err(|e| e.in_stage("cumulants"))?,
        );
    }
    let violations = estimate.concavity_violations(Source::Leaders, 1e-9);
    if !violations.is_empty() {
        warnings.push(format!(
            "leader scaling function is not concave at {} grid point(s)",
            violations.len()
        ));
    }

    if config.bootstrap {
        let analysis = BootstrapAnalysis {
            p_grid: config.p_grid.clone(),
            regression,
            cumulant_order: config.cumulant_order,
        };
        match bootstrap_ci(
            Some(&pyramid),
            Some(&leaders),
            &analysis,
            &config.bootstrap_config(),
        ) {
            Ok(b) => estimate.intervals = b.intervals,
            Err(e) => failures.push(StageFailure {
                stage: "bootstrap".into(),
                message: e.to_string(),
            }),
        }
    }

    let spectrum = match legendre_spectrum(&estimate, &config.h_grid()) {
        Ok(sp) => {
            warnings.extend(sp.warnings.iter().cloned());
            Some(sp)
        }
        Err(e) => {
            failures.push(StageFailure {
                stage: "legendre".into(),
                message: e.to_string(),
            });
            None
        }
    };
    let memberships = match membership_tests(&estimate) {
        Ok(m) => Some(m),
        Err(e) => {
            failures.push(StageFailure {
                stage: "memberships".into(),
                message: e.to_string(),
            });
            None
        }
    };

    Ok(Analysis {
        shape: [signal.rows(), signal.cols()],
        max_level,
        regression,
        h_min_raw,
        integration_order: s,
        estimate,
        coefficient_table,
        leader_table,
        spectrum,
        memberships,
        warnings,
        failures,
    })
}

/// Rejects inputs whose coefficients are rounding noise (constants and
/// low-order polynomials), which would otherwise yield arbitrary exponents.
fn check_coefficients(signal: &Signal, pyramid: &CoefficientPyramid) -> Result<()> {
    let amplitude = signal.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let largest = pyramid
        .levels()
        .iter()
        .flat_map(|l| l.bands.iter().flatten())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if largest <= 1e-12 * amplitude {
        return Err(Error::Degenerate(
            "wavelet coefficients vanish (constant or polynomial input)".into(),
        ));
    }
    Ok(())
}

/// One record of a sliding-window analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub start: usize,
    pub length: usize,
    pub result: Result<Analysis>,
}

/// Analyzes windows `[start, start + length)` of a 1D signal for
/// `start = 0, hop, 2 hop, ...`, in parallel.
pub fn analyze_windows(
    signal: &Signal,
    config: &AnalysisConfig,
    length: usize,
    hop: usize,
) -> Result<Vec<WindowRecord>> {
    if signal.dim() != Dim::One {
        return invalid_arg("sliding windows are only supported for 1D signals");
    }
    if length < 2 || hop == 0 || length > signal.len() {
        return invalid_arg(format!(
            "window length must be in 2..={} and hop positive",
            signal.len()
        ));
    }
    let starts: Vec<usize> = (0..=signal.len() - length).step_by(hop).collect();
    Ok(starts
        .into_par_iter()
        .map(|start| WindowRecord {
            start,
            length,
            result: signal
                .window(start, length)
                .and_then(|w| analyze(&w, config)),
        })
        .collect())
}
