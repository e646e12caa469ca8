//! Result documents. `result.json` is the single source of truth; the CSV
//! files are projections of it. Exponents, spectra and cumulants are
//! reported for the input itself, i.e. with any pseudo-fractional
//! integration removed; `integration_order` records what was applied.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use mfleaders::error::{Error, Result};
use mfleaders::geometry::{BinaryGrid, GraphDimension};
use mfleaders::pipeline::{Analysis, AnalysisConfig, StageFailure, WindowRecord};
use mfleaders::regression::RegressionConfig;
use mfleaders::scaling::{
    LegendreSpectrum, MembershipReport, ScalingEstimate, Source, StructureFunctionTable,
};
use mfleaders::synth::{GeneratorSpec, GroundTruth};
use mfleaders::{Dim, Signal};

pub const SCHEMA_VERSION: u32 = 1;

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub dim: Dim,
    pub shape: [usize; 2],
}

impl InputInfo {
    fn new(path: &Path, signal: &Signal) -> Self {
        Self {
            path: path.display().to_string(),
            dim: signal.dim(),
            shape: [signal.rows(), signal.cols()],
        }
    }
}

/// Headline numbers of one analysis.
#[derive(Debug, Serialize)]
pub struct Summary {
    pub h_min: Option<f64>,
    /// Log-cumulants `c_1, c_2, ...`.
    pub cumulants: Vec<f64>,
    pub eta1: Option<f64>,
    /// `d - eta(1)`: box dimension of the discontinuity set of an
    /// indicator image.
    pub d_minus_eta1: Option<f64>,
    pub spectrum_max: Option<f64>,
    pub spectrum_argmax: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Record {
    pub status: &'static str,
    pub max_level: usize,
    pub regression: RegressionConfig,
    pub integration_order: f64,
    /// Slope of the coefficient suprema of the input.
    pub h_min_raw: f64,
    pub summary: Summary,
    pub estimate: ScalingEstimate,
    pub spectrum: Option<LegendreSpectrum>,
    pub memberships: Option<MembershipReport>,
    /// Log-statistics of the analyzed (integrated) coefficients and
    /// leaders per level.
    pub coefficient_table: StructureFunctionTable,
    pub leader_table: StructureFunctionTable,
    pub warnings: Vec<String>,
    pub failures: Vec<StageFailure>,
}

/// `L(h)` of the input from that of its integral: `h -> h - s`.
fn deintegrated_spectrum(sp: &LegendreSpectrum, s: f64) -> LegendreSpectrum {
    let mut sp = sp.clone();
    for h in &mut sp.h {
        *h -= s;
    }
    sp.h_support = (sp.h_support.0.map(|h| h - s), sp.h_support.1.map(|h| h - s));
    sp
}

impl Record {
    fn new(a: Analysis) -> Self {
        let s = a.integration_order;
        let estimate = a.estimate.deintegrated();
        let spectrum = a.spectrum.as_ref().map(|sp| deintegrated_spectrum(sp, s));
        let d = match estimate.dim {
            Dim::One => 1.0,
            Dim::Two => 2.0,
        };
        let eta1 = estimate.value_at(Source::Coefficients, 1.0).map(|(v, _)| v);
        let summary = Summary {
            h_min: estimate.h_min,
            cumulants: estimate
                .cumulants
                .as_ref()
                .map(|c| c.c.clone())
                .unwrap_or_default(),
            eta1,
            d_minus_eta1: eta1.map(|e| d - e),
            spectrum_max: spectrum.as_ref().map(|sp| sp.max()),
            spectrum_argmax: spectrum.as_ref().map(|sp| sp.argmax_h()),
        };
        Self {
            status: if a.failures.is_empty() {
                "ok"
            } else {
                "partial"
            },
            max_level: a.max_level,
            regression: a.regression,
            integration_order: s,
            h_min_raw: a.h_min_raw,
            summary,
            estimate,
            spectrum,
            memberships: a.memberships,
            coefficient_table: a.coefficient_table,
            leader_table: a.leader_table,
            warnings: a.warnings,
            failures: a.failures,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct WindowEntry {
    pub start: usize,
    pub length: usize,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Record>,
}

#[derive(Debug, Serialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    pub timestamp: u64,
    /// `ok`, or `partial` when a stage or window failed.
    pub status: &'static str,
    pub input: InputInfo,
    pub config: AnalysisConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Record>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub windows: Option<Vec<WindowEntry>>,
}

impl ResultDocument {
    pub fn single(path: &Path, signal: &Signal, config: &AnalysisConfig, a: Analysis) -> Self {
        let record = Record::new(a);
        Self {
            schema_version: SCHEMA_VERSION,
            timestamp: timestamp(),
            status: record.status,
            input: InputInfo::new(path, signal),
            config: config.clone(),
            result: Some(record),
            windows: None,
        }
    }

    pub fn windowed(
        path: &Path,
        signal: &Signal,
        config: &AnalysisConfig,
        records: Vec<WindowRecord>,
    ) -> Self {
        let windows: Vec<WindowEntry> = records
            .into_iter()
            .map(|r| match r.result {
                Ok(a) => {
                    let record = Record::new(a);
                    WindowEntry {
                        start: r.start,
                        length: r.length,
                        status: record.status,
                        error: None,
                        result: Some(record),
                    }
                }
                Err(e) => WindowEntry {
                    start: r.start,
                    length: r.length,
                    status: "failed",
                    error: Some(e.to_string()),
                    result: None,
                },
            })
            .collect();
        let all_ok = windows.iter().all(|w| w.status == "ok");
        Self {
            schema_version: SCHEMA_VERSION,
            timestamp: timestamp(),
            status: if all_ok { "ok" } else { "partial" },
            input: InputInfo::new(path, signal),
            config: config.clone(),
            result: None,
            windows: Some(windows),
        }
    }

    /// Records with their window start (none for a single analysis).
    fn records(&self) -> Vec<(Option<usize>, &Record)> {
        match (&self.result, &self.windows) {
            (Some(r), _) => vec![(None, r)],
            (None, Some(w)) => w
                .iter()
                .filter_map(|w| w.result.as_ref().map(|r| (Some(w.start), r)))
                .collect(),
            (None, None) => Vec::new(),
        }
    }

    pub fn failure_summary(&self) -> String {
        let mut parts = Vec::new();
        for (start, r) in self.records() {
            for f in &r.failures {
                parts.push(match start {
                    Some(s) => format!("window {s}: {} ({})", f.stage, f.message),
                    None => format!("{} ({})", f.stage, f.message),
                });
            }
        }
        for w in self.windows.iter().flatten() {
            if let Some(e) = &w.error {
                parts.push(format!("window {}: {e}", w.start));
            }
        }
        parts.join("; ")
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Builds a CSV with a `start` column for windowed documents.
fn table(doc: &ResultDocument, header: &str, rows: impl Fn(&Record) -> Vec<Vec<String>>) -> String {
    let windowed = doc.windows.is_some();
    let mut out = String::new();
    if windowed {
        out.push_str("start,");
    }
    out.push_str(header);
    out.push('\n');
    for (start, record) in doc.records() {
        for row in rows(record) {
            if let (true, Some(s)) = (windowed, start) {
                let _ = write!(out, "{s},");
            }
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

fn zeta_rows(r: &Record) -> Vec<Vec<String>> {
    let e = &r.estimate;
    let iv = e.intervals.as_ref();
    let bounds = |v: Option<&Vec<mfleaders::scaling::Interval>>, i: usize| match v {
        Some(v) => (num(v[i].lo), num(v[i].hi)),
        None => (String::new(), String::new()),
    };
    e.p_grid
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (zl, zh) = bounds(iv.and_then(|iv| iv.zeta.as_ref()), i);
            let (el, eh) = bounds(iv.and_then(|iv| iv.eta.as_ref()), i);
            vec![
                num(*p),
                opt(e.zeta.as_ref().map(|z| z[i])),
                opt(e.eta.as_ref().map(|z| z[i])),
                zl,
                zh,
                el,
                eh,
            ]
        })
        .collect()
}

fn spectrum_rows(r: &Record) -> Vec<Vec<String>> {
    match &r.spectrum {
        None => Vec::new(),
        Some(sp) => (0..sp.h.len())
            .map(|i| {
                vec![
                    num(sp.h[i]),
                    num(sp.l[i]),
                    num(sp.p_star[i]),
                    sp.negative[i].to_string(),
                ]
            })
            .collect(),
    }
}

fn cumulant_rows(r: &Record) -> Vec<Vec<String>> {
    let Some(c) = &r.estimate.cumulants else {
        return Vec::new();
    };
    let iv = r
        .estimate
        .intervals
        .as_ref()
        .and_then(|iv| iv.cumulants.as_ref());
    (0..c.c.len())
        .map(|m| {
            let (lo, hi) = match iv {
                Some(v) => (num(v[m].lo), num(v[m].hi)),
                None => (String::new(), String::new()),
            };
            vec![
                (m + 1).to_string(),
                num(c.c[m]),
                num(c.intercepts[m]),
                lo,
                hi,
            ]
        })
        .collect()
}

/// Writes result.json, zeta.csv, spectrum.csv and cumulants.csv.
pub fn write_analysis_outputs(dir: &Path, doc: &ResultDocument) -> Result<()> {
    let zeta = table(doc, "p,zeta,eta,zeta_lo,zeta_hi,eta_lo,eta_hi", zeta_rows);
    let spectrum = table(doc, "h,L,p_star,negative", spectrum_rows);
    let cumulants = table(doc, "m,c,intercept,lo,hi", cumulant_rows);
    write_json(&dir.join("result.json"), doc)?;
    std::fs::write(dir.join("zeta.csv"), zeta)?;
    std::fs::write(dir.join("spectrum.csv"), spectrum)?;
    std::fs::write(dir.join("cumulants.csv"), cumulants)?;
    Ok(())
}

/// Sidecar of a synthesized signal.
#[derive(Debug, Serialize)]
pub struct TruthDocument<'a> {
    pub schema_version: u32,
    pub seed: u64,
    pub spec: &'a GeneratorSpec,
    pub truth: &'a GroundTruth,
    pub h_min: f64,
    /// `(p, zeta(p))` on `p = -5, -4.5, ..., 5`.
    pub zeta: Vec<(f64, f64)>,
}

impl<'a> TruthDocument<'a> {
    pub fn new(spec: &'a GeneratorSpec, seed: u64, truth: &'a GroundTruth) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed,
            spec,
            truth,
            h_min: truth.h_min(),
            zeta: (-10..=10)
                .map(|i| {
                    let p = f64::from(i) * 0.5;
                    (p, truth.zeta(p))
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct BoxdimDocument {
    pub schema_version: u32,
    pub timestamp: u64,
    pub status: &'static str,
    pub input: String,
    /// `grid` for box counting, `graph` for the oscillation estimate.
    pub kind: &'static str,
    pub regression: RegressionConfig,
    pub dimension: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_counts: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphDimension>,
}

impl BoxdimDocument {
    pub fn grid(
        path: &Path,
        grid: &BinaryGrid,
        regression: RegressionConfig,
        dimension: f64,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            timestamp: timestamp(),
            status: "ok",
            input: path.display().to_string(),
            kind: "grid",
            regression,
            dimension,
            box_counts: Some(grid.box_counts()),
            graph: None,
        }
    }

    pub fn graph(path: &Path, regression: RegressionConfig, graph: GraphDimension) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            timestamp: timestamp(),
            status: "ok",
            input: path.display().to_string(),
            kind: "graph",
            regression,
            dimension: graph.dimension,
            box_counts: None,
            graph: Some(graph),
        }
    }
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.4}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => "n/a".into(),
        other => other.to_string(),
    }
}

fn record_lines(r: &Value, indent: &str) -> Vec<String> {
    let s = &r["summary"];
    let mut lines = vec![
        format!("{indent}status: {}", fmt_value(&r["status"])),
        format!(
            "{indent}integration order: {}",
            fmt_value(&r["integration_order"])
        ),
        format!("{indent}h_min: {}", fmt_value(&s["h_min"])),
    ];
    if let Some(c) = s["cumulants"].as_array() {
        for (m, v) in c.iter().enumerate() {
            lines.push(format!("{indent}c{}: {}", m + 1, fmt_value(v)));
        }
    }
    lines.push(format!("{indent}eta(1): {}", fmt_value(&s["eta1"])));
    lines.push(format!(
        "{indent}spectrum max {} at h = {}",
        fmt_value(&s["spectrum_max"]),
        fmt_value(&s["spectrum_argmax"])
    ));
    if let Some(m) = r["memberships"].as_object() {
        for (k, v) in m {
            lines.push(format!("{indent}{k}: {}", fmt_value(v)));
        }
    }
    for f in r["failures"].as_array().into_iter().flatten() {
        lines.push(format!(
            "{indent}FAILED {}: {}",
            fmt_value(&f["stage"]),
            fmt_value(&f["message"])
        ));
    }
    lines
}

/// Human-readable summary of any result.json.
pub fn summarize(doc: &Value) -> Result<Vec<String>> {
    let version = doc["schema_version"]
        .as_u64()
        .ok_or_else(|| Error::InvalidData("not a result document: no schema_version".into()))?;
    let mut lines = vec![format!(
        "schema {version}, status {}",
        fmt_value(&doc["status"])
    )];
    if doc.get("dimension").is_some() {
        lines.push(format!(
            "{} dimension of {}: {}",
            fmt_value(&doc["kind"]),
            fmt_value(&doc["input"]),
            fmt_value(&doc["dimension"])
        ));
        return Ok(lines);
    }
    lines.push(format!(
        "input {} shape {}",
        fmt_value(&doc["input"]["path"]),
        doc["input"]["shape"]
    ));
    if doc["result"].is_object() {
        lines.extend(record_lines(&doc["result"], "  "));
    } else if let Some(windows) = doc["windows"].as_array() {
        for w in windows {
            lines.push(format!(
                "window start {} length {}: {}",
                w["start"],
                w["length"],
                fmt_value(&w["status"])
            ));
            if w["result"].is_object() {
                lines.extend(record_lines(&w["result"], "  "));
            } else {
                lines.push(format!("  error: {}", fmt_value(&w["error"])));
            }
        }
    } else {
        return Err(Error::InvalidData("result document has no result".into()));
    }
    Ok(lines)
}
