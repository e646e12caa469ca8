use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use mfleaders::error::{Error, Result};
use mfleaders::io::read_config;
use mfleaders::pipeline::{AnalysisConfig, FracintMode};

#[derive(Debug, Parser)]
#[command(
    name = "mfleaders",
    version,
    about = "Wavelet-leader multifractal analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a signal with a known scaling model.
    Synth(SynthArgs),
    /// Estimate scaling functions, log-cumulants, h_min and the spectrum.
    Analyze(AnalyzeArgs),
    /// Same as analyze with bootstrap confidence intervals enabled.
    Bootstrap(AnalyzeArgs),
    /// Box dimension of a binary image, or graph dimension of a 1D signal.
    Boxdim(BoxdimArgs),
    /// Print a summary of a result.json.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// fbm, fbm2d, weierstrass, cascade, mftime or stable.
    pub kind: String,
    /// Generator parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Hurst exponent (shorthand for --param H=...).
    #[arg(long = "H", value_name = "H")]
    pub hurst: Option<f64>,
    /// Length or side (shorthand for --param n=...).
    #[arg(long)]
    pub n: Option<usize>,
    /// Square the generated signal.
    #[arg(long)]
    pub square: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (.csv, .f64, .pgm) or - for CSV on stdout.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    /// Ground-truth JSON path; defaults to <out>.truth.json for files.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input file (.csv, .f64, .pgm, .pbm) or - for CSV on stdin.
    #[arg(long, default_value = "-")]
    pub input: PathBuf,
    /// Image shape ROWSxCOLS for raw .f64 input.
    #[arg(long, value_parser = parse_shape)]
    pub shape: Option<[usize; 2]>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Sliding-window length for windowed re-analysis of 1D signals.
    #[arg(long)]
    pub window_length: Option<usize>,
    /// Window hop; the window length when absent.
    #[arg(long, requires = "window_length")]
    pub hop: Option<usize>,
    /// Write the effective configuration to this file.
    #[arg(long)]
    pub save_config: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Analysis settings; each flag overrides the config file, which
/// overrides the defaults.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Flat TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub filter_order: Option<usize>,
    /// periodic or discard.
    #[arg(long)]
    pub boundary: Option<String>,
    #[arg(long)]
    pub max_level: Option<usize>,
    #[arg(long)]
    pub j1: Option<usize>,
    #[arg(long)]
    pub j2: Option<usize>,
    /// uniform or by_count.
    #[arg(long)]
    pub weighting: Option<String>,
    #[arg(long)]
    pub min_atoms: Option<usize>,
    /// Comma-separated values or LO:STEP:HI.
    #[arg(long, allow_hyphen_values = true)]
    pub p_grid: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub h_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub h_hi: Option<f64>,
    #[arg(long)]
    pub h_count: Option<usize>,
    #[arg(long)]
    pub cumulant_order: Option<usize>,
    /// auto, off or a fixed integration order.
    #[arg(long, allow_hyphen_values = true)]
    pub fracint: Option<String>,
    /// Enable bootstrap confidence intervals.
    #[arg(long)]
    pub bootstrap: bool,
    #[arg(long)]
    pub resamples: Option<usize>,
    #[arg(long)]
    pub block_length: Option<usize>,
    #[arg(long)]
    pub ci_level: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<AnalysisConfig> {
        let mut c = match &self.config {
            Some(path) => read_config(path)?,
            None => AnalysisConfig::default(),
        };
        macro_rules! set {
            ($field:ident) => {
                if let Some(v) = &self.$field {
                    c.$field = v.clone();
                }
            };
        }
        set!(filter_order);
        set!(j1);
        set!(min_atoms);
        set!(h_lo);
        set!(h_hi);
        set!(h_count);
        set!(cumulant_order);
        set!(resamples);
        set!(ci_level);
        set!(seed);
        if self.max_level.is_some() {
            c.max_level = self.max_level;
        }
        if self.j2.is_some() {
            c.j2 = self.j2;
        }
        if self.block_length.is_some() {
            c.block_length = self.block_length;
        }
        if let Some(g) = &self.p_grid {
            c.p_grid = parse_grid(g).map_err(|e| Error::InvalidArgument(format!("p grid: {e}")))?;
        }
        if let Some(b) = &self.boundary {
            c.boundary = b.parse()?;
        }
        if let Some(w) = &self.weighting {
            c.weighting = w.parse()?;
        }
        if let Some(f) = &self.fracint {
            c.fracint = f.parse::<FracintMode>()?;
        }
        if self.bootstrap {
            c.bootstrap = true;
        }
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct BoxdimArgs {
    /// Binary image (.pbm, or .pgm/.f64 with nonzero occupied) or a 1D
    /// signal for the graph dimension.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub j1: usize,
    #[arg(long)]
    pub j2: Option<usize>,
    #[arg(long, default_value = "uniform")]
    pub weighting: String,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// result.json written by analyze, bootstrap or boxdim.
    pub result: PathBuf,
}

fn parse_shape(s: &str) -> std::result::Result<[usize; 2], String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected ROWSxCOLS, got '{s}'"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok([parse(r)?, parse(c)?])
}

/// `a,b,c` or `lo:step:hi` (inclusive).
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (lo, step, hi) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0 && hi >= lo) {
            return Err("range needs step > 0 and hi >= lo".into());
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| lo + i as f64 * step).collect());
    }
    s.split(',').map(num).collect()
}
