mod args;
mod document;
mod generate;

use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use log::warn;

use mfleaders::error::{Error, ErrorClass, Result};
use mfleaders::geometry::{box_dimension, graph_dimension_from_oscillation, BinaryGrid};
use mfleaders::io::{parse_csv, read_pbm, read_signal, write_config, write_signal};
use mfleaders::pipeline::{analyze, analyze_windows};
use mfleaders::regression::{RegressionConfig, Weighting};
use mfleaders::{Dim, Signal};

use args::{AnalyzeArgs, BoxdimArgs, Cli, Command, ReportArgs, SynthArgs};
use document::{write_analysis_outputs, write_json, BoxdimDocument, ResultDocument};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Synth(a) => synth(&a),
        Command::Analyze(a) => run_analysis(&a, false),
        Command::Bootstrap(a) => run_analysis(&a, true),
        Command::Boxdim(a) => boxdim(&a),
        Command::Report(a) => report(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Config => 2,
        ErrorClass::Data => 3,
        ErrorClass::Numeric => 4,
    }
}

fn read_input(path: &Path, shape: Option<[usize; 2]>) -> Result<Signal> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text)?;
        return Signal::new_1d(parse_csv(&text)?);
    }
    read_signal(path, shape)
}

fn synth(a: &SynthArgs) -> Result<()> {
    let spec = generate::spec_from_args(a)?;
    let synthesis = mfleaders::synth::generate(&spec, a.seed)?;
    let truth = document::TruthDocument::new(&spec, a.seed, &synthesis.truth);
    if a.out == Path::new("-") {
        if synthesis.signal.dim() != Dim::One {
            return Err(Error::InvalidArgument(
                "2D output needs a file (.f64 or .pgm)".into(),
            ));
        }
        let mut out = std::io::stdout().lock();
        for v in synthesis.signal.samples() {
            writeln!(out, "{v}")?;
        }
    } else {
        write_signal(&a.out, &synthesis.signal)?;
    }
    let sidecar = a.truth.clone().or_else(|| {
        (a.out != Path::new("-")).then(|| {
            let mut p = a.out.clone().into_os_string();
            p.push(".truth.json");
            PathBuf::from(p)
        })
    });
    if let Some(path) = sidecar {
        write_json(&path, &truth)?;
    }
    Ok(())
}

fn run_analysis(a: &AnalyzeArgs, force_bootstrap: bool) -> Result<()> {
    let mut config = a.config.resolve()?;
    if force_bootstrap {
        config.bootstrap = true;
    }
    config.validate()?;
    let signal = read_input(&a.input, a.shape)?;
    let document = match a.window_length {
        None => {
            let analysis = analyze(&signal, &config)?;
            ResultDocument::single(&a.input, &signal, &config, analysis)
        }
        Some(length) => {
            let hop = a.hop.unwrap_or(length);
            let records = analyze_windows(&signal, &config, length, hop)?;
            if records.iter().all(|r| r.result.is_err()) {
                let first = records.into_iter().next().expect("at least one window");
                return Err(first.result.expect_err("all windows failed"));
            }
            ResultDocument::windowed(&a.input, &signal, &config, records)
        }
    };
    std::fs::create_dir_all(&a.out_dir)?;
    write_analysis_outputs(&a.out_dir, &document)?;
    if let Some(path) = &a.save_config {
        write_config(path, &config)?;
    }
    if document.status != "ok" {
        warn!("partial result: {}", document.failure_summary());
    }
    Ok(())
}

/// Box-counting input: a binary grid, or a 1D signal whose graph is
/// measured.
enum BoxInput {
    Grid(BinaryGrid),
    Graph(Signal),
}

/// PBM files are grids; square power-of-two images are grids with nonzero
/// pixels occupied; 1D signals are graphs.
fn read_box_input(path: &Path) -> Result<BoxInput> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext.eq_ignore_ascii_case("pbm") {
        return read_pbm(path).map(BoxInput::Grid);
    }
    let signal = read_input(path, None)?;
    if signal.dim() == Dim::One {
        return Ok(BoxInput::Graph(signal));
    }
    if signal.rows() != signal.cols() || !signal.rows().is_power_of_two() {
        return Err(Error::InvalidData(format!(
            "box counting needs a square power-of-two image, got {}x{}",
            signal.rows(),
            signal.cols()
        )));
    }
    let cells = signal.samples().iter().map(|v| *v != 0.0).collect();
    BinaryGrid::new(signal.rows().trailing_zeros() as usize, cells).map(BoxInput::Grid)
}

fn boxdim(a: &BoxdimArgs) -> Result<()> {
    let weighting: Weighting = a.weighting.parse()?;
    let document = match read_box_input(&a.input)? {
        BoxInput::Grid(grid) => {
            let j2 = a.j2.unwrap_or(grid.resolution().saturating_sub(1));
            let regression = RegressionConfig::new(a.j1, j2)?.with_weighting(weighting);
            let dimension = box_dimension(&grid, &regression)?;
            BoxdimDocument::grid(&a.input, &grid, regression, dimension)
        }
        BoxInput::Graph(signal) => {
            let j2 = a.j2.unwrap_or(mfleaders::dwt::max_level_for(signal.len()));
            let regression = RegressionConfig::new(a.j1, j2)?.with_weighting(weighting);
            let graph = graph_dimension_from_oscillation(&signal, &regression)?;
            BoxdimDocument::graph(&a.input, regression, graph)
        }
    };
    std::fs::create_dir_all(&a.out_dir)?;
    write_json(&a.out_dir.join("result.json"), &document)?;
    println!("{} dimension {:.4}", document.kind, document.dimension);
    Ok(())
}

fn report(a: &ReportArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.result)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::InvalidData(e.to_string()))?;
    let lines = document::summarize(&value)?;
    let mut out = std::io::stdout().lock();
    for line in lines {
        writeln!(out, "{line}")?;
    }
    Ok(())
}
