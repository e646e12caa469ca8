//! File formats: CSV and raw little-endian `f64` for 1D signals, binary
//! PGM (P5) and raw grids for images, PBM (P4) for binary grids, pyramid
//! export as a JSON manifest with one raw array per band, and the flat
//! TOML analysis configuration.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dwt::{Boundary, CoarseBand, CoefficientPyramid, DetailLevel};
use crate::error::{Error, Result};
use crate::geometry::BinaryGrid;
use crate::pipeline::AnalysisConfig;
use crate::signal::{Dim, Signal};

fn data_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidData(msg.into()))
}

/// One value per line; blank lines and `#` comments are skipped.
pub fn parse_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) => return data_err(format!("line {}: '{line}' is not a number", i + 1)),
        }
    }
    if out.is_empty() {
        return data_err("no samples");
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Signal> {
    Signal::new_1d(parse_csv(&fs::read_to_string(path)?)?)
}

pub fn write_csv(path: &Path, values: &[f64]) -> Result<()> {
    let mut text = String::with_capacity(values.len() * 24);
    for v in values {
        text.push_str(&format!("{v}\n"));
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn decode_f64_le(bytes: &[u8]) -> Result<Vec<f64>> {
    if !bytes.len().is_multiple_of(8) {
        return data_err(format!(
            "{} bytes is not a whole number of f64",
            bytes.len()
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn encode_f64_le(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Raw little-endian `f64`: a 1D signal, or a `[rows, cols]` image when a
/// shape is given.
pub fn read_raw(path: &Path, shape: Option<[usize; 2]>) -> Result<Signal> {
    let values = decode_f64_le(&fs::read(path)?)?;
    if values.is_empty() {
        return data_err("no samples");
    }
    match shape {
        None => Signal::new_1d(values),
        Some([rows, cols]) => Signal::new_2d(rows, cols, values),
    }
}

pub fn write_raw(path: &Path, values: &[f64]) -> Result<()> {
    fs::write(path, encode_f64_le(values))?;
    Ok(())
}

/// Netpbm header: magic, width, height and (except for P4) maxval, then
/// the offset of the pixel data.
struct PnmHeader {
    magic: [u8; 2],
    width: usize,
    height: usize,
    maxval: usize,
    offset: usize,
}

fn parse_pnm_header(bytes: &[u8]) -> Result<PnmHeader> {
    if bytes.len() < 2 || bytes[0] != b'P' {
        return data_err("not a netpbm file");
    }
    let magic = [bytes[0], bytes[1]];
    let fields = if magic == *b"P4" { 2 } else { 3 };
    let mut values = Vec::with_capacity(fields);
    let mut i = 2;
    while values.len() < fields {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return data_err("truncated or malformed netpbm header");
        }
        let text = std::str::from_utf8(&bytes[start..i]).expect("ascii digits");
        values.push(
            text.parse::<usize>()
                .map_err(|e| Error::InvalidData(e.to_string()))?,
        );
    }
    // Exactly one whitespace byte separates the header from the data.
    if i >= bytes.len() || !bytes[i].is_ascii_whitespace() {
        return data_err("missing separator after netpbm header");
    }
    Ok(PnmHeader {
        magic,
        width: values[0],
        height: values[1],
        maxval: values.get(2).copied().unwrap_or(1),
        offset: i + 1,
    })
}

/// Binary PGM (P5), 8-bit or 16-bit big-endian samples.
pub fn decode_pgm(bytes: &[u8]) -> Result<Signal> {
    let h = parse_pnm_header(bytes)?;
    if h.magic != *b"P5" {
        return data_err("expected a binary PGM (P5)");
    }
    if h.maxval == 0 || h.maxval > 65535 {
        return data_err(format!("PGM maxval {} out of range", h.maxval));
    }
    let n = match h.width.checked_mul(h.height) {
        Some(0) => return data_err("empty image"),
        Some(n) if n <= usize::MAX / 2 => n,
        _ => return data_err("PGM dimensions overflow"),
    };
    let depth = if h.maxval < 256 { 1 } else { 2 };
    let data = &bytes[h.offset..];
    if data.len() < n * depth {
        return data_err(format!(
            "PGM data holds {} bytes, expected {}",
            data.len(),
            n * depth
        ));
    }
    let values = if depth == 1 {
        data[..n].iter().map(|b| f64::from(*b)).collect()
    } else {
        data[..2 * n]
            .chunks_exact(2)
            .map(|c| f64::from(u16::from_be_bytes([c[0], c[1]])))
            .collect()
    };
    Signal::new_2d(h.height, h.width, values)
}

pub fn read_pgm(path: &Path) -> Result<Signal> {
    decode_pgm(&fs::read(path)?)
}

/// Bit depth of written PGM files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmDepth {
    Eight,
    Sixteen,
}

/// Maps the sample range linearly onto `0..=maxval`; constant images map
/// to zero.
pub fn encode_pgm(image: &Signal, depth: PgmDepth) -> Result<Vec<u8>> {
    if image.dim() != Dim::Two {
        return Err(Error::InvalidArgument(
            "PGM output needs a 2D signal".into(),
        ));
    }
    let maxval: u16 = match depth {
        PgmDepth::Eight => 255,
        PgmDepth::Sixteen => 65535,
    };
    let x = image.samples();
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = if hi > lo {
        f64::from(maxval) / (hi - lo)
    } else {
        0.0
    };
    let mut out = format!("P5\n{} {}\n{maxval}\n", image.cols(), image.rows()).into_bytes();
    for v in x {
        let q = ((v - lo) * scale).round() as u16;
        match depth {
            PgmDepth::Eight => out.push(q as u8),
            PgmDepth::Sixteen => out.extend_from_slice(&q.to_be_bytes()),
        }
    }
    Ok(out)
}

pub fn write_pgm(path: &Path, image: &Signal, depth: PgmDepth) -> Result<()> {
    fs::write(path, encode_pgm(image, depth)?)?;
    Ok(())
}

/// Binary PBM (P4); set bits are occupied cells. The image must be square
/// with a power-of-two side.
pub fn decode_pbm(bytes: &[u8]) -> Result<BinaryGrid> {
    let h = parse_pnm_header(bytes)?;
    if h.magic != *b"P4" {
        return data_err("expected a binary PBM (P4)");
    }
    if h.width != h.height || !h.width.is_power_of_two() {
        return data_err(format!(
            "binary grids must be square with a power-of-two side, got {}x{}",
            h.width, h.height
        ));
    }
    let stride = h.width.div_ceil(8);
    let data = &bytes[h.offset..];
    if data.len() < stride * h.height {
        return data_err("truncated PBM data");
    }
    let mut cells = Vec::with_capacity(h.width * h.height);
    for r in 0..h.height {
        let row = &data[r * stride..(r + 1) * stride];
        for c in 0..h.width {
            cells.push(row[c / 8] & (0x80 >> (c % 8)) != 0);
        }
    }
    BinaryGrid::new(h.width.trailing_zeros() as usize, cells)
}

pub fn read_pbm(path: &Path) -> Result<BinaryGrid> {
    decode_pbm(&fs::read(path)?)
}

pub fn encode_pbm(grid: &BinaryGrid) -> Vec<u8> {
    let side = grid.side();
    let stride = side.div_ceil(8);
    let mut out = format!("P4\n{side} {side}\n").into_bytes();
    for r in 0..side {
        let mut row = vec![0u8; stride];
        for c in 0..side {
            if grid.get(r, c) {
                row[c / 8] |= 0x80 >> (c % 8);
            }
        }
        out.extend_from_slice(&row);
    }
    out
}

pub fn write_pbm(path: &Path, grid: &BinaryGrid) -> Result<()> {
    fs::write(path, encode_pbm(grid))?;
    Ok(())
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Reads a signal, choosing the format from the extension: `csv`/`txt`,
/// `f64`/`bin`/`raw` (1D unless `shape` is given), `pgm`, `pbm`.
pub fn read_signal(path: &Path, shape: Option<[usize; 2]>) -> Result<Signal> {
    match extension(path).as_str() {
        "csv" | "txt" => read_csv(path),
        "f64" | "bin" | "raw" => read_raw(path, shape),
        "pgm" => read_pgm(path),
        "pbm" => Ok(read_pbm(path)?.to_signal()),
        other => Err(Error::InvalidArgument(format!(
            "unknown input format '{other}' (expected csv, f64, pgm or pbm)"
        ))),
    }
}

/// Writes a signal, choosing the format from the extension: `csv` (1D),
/// `f64`/`bin`/`raw`, `pgm` (2D, 16-bit).
pub fn write_signal(path: &Path, signal: &Signal) -> Result<()> {
    match extension(path).as_str() {
        "csv" | "txt" if signal.dim() == Dim::One => write_csv(path, signal.samples()),
        "f64" | "bin" | "raw" => write_raw(path, signal.samples()),
        "pgm" => write_pgm(path, signal, PgmDepth::Sixteen),
        other => Err(Error::InvalidArgument(format!(
            "cannot write a {:?} signal as '{other}'",
            signal.dim()
        ))),
    }
}

/// Manifest of an exported pyramid; arrays are raw little-endian `f64`,
/// masks one byte per position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PyramidManifest {
    pub dim: Dim,
    pub input_shape: [usize; 2],
    pub filter_order: usize,
    pub boundary: Boundary,
    pub integration_order: f64,
    pub levels: Vec<ManifestLevel>,
    pub coarse: Option<ManifestArray>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestLevel {
    pub j: usize,
    pub shape: [usize; 2],
    pub bands: Vec<String>,
    pub valid: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestArray {
    pub shape: [usize; 2],
    pub values: String,
    pub valid: String,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn write_mask(path: &Path, valid: &[bool]) -> Result<()> {
    fs::write(path, valid.iter().map(|v| u8::from(*v)).collect::<Vec<_>>())?;
    Ok(())
}

fn read_mask(path: &Path, len: usize) -> Result<Vec<bool>> {
    let bytes = fs::read(path)?;
    if bytes.len() != len {
        return data_err(format!(
            "{}: {} mask bytes, expected {len}",
            path.display(),
            bytes.len()
        ));
    }
    Ok(bytes.into_iter().map(|b| b != 0).collect())
}

fn read_array(path: &Path, len: usize) -> Result<Vec<f64>> {
    let values = decode_f64_le(&fs::read(path)?)?;
    if values.len() != len {
        return data_err(format!(
            "{}: {} values, expected {len}",
            path.display(),
            values.len()
        ));
    }
    Ok(values)
}

/// Writes `manifest.json` and the per-level arrays into `dir`, which is
/// created if needed.
pub fn export_pyramid(dir: &Path, pyramid: &CoefficientPyramid) -> Result<PyramidManifest> {
    fs::create_dir_all(dir)?;
    let mut levels = Vec::with_capacity(pyramid.num_levels());
    for level in pyramid.levels() {
        let mut bands = Vec::with_capacity(level.bands.len());
        for (b, band) in level.bands.iter().enumerate() {
            let name = format!("level{:02}_band{b}.f64", level.j);
            write_raw(&dir.join(&name), band)?;
            bands.push(name);
        }
        let valid = format!("level{:02}_valid.u8", level.j);
        write_mask(&dir.join(&valid), &level.valid)?;
        levels.push(ManifestLevel {
            j: level.j,
            shape: level.shape,
            bands,
            valid,
        });
    }
    let coarse = match pyramid.coarse() {
        Some(c) => {
            let (values, valid) = ("coarse.f64".to_string(), "coarse_valid.u8".to_string());
            write_raw(&dir.join(&values), &c.values)?;
            write_mask(&dir.join(&valid), &c.valid)?;
            Some(ManifestArray {
                shape: c.shape,
                values,
                valid,
            })
        }
        None => None,
    };
    let manifest = PyramidManifest {
        dim: pyramid.dim(),
        input_shape: pyramid.input_shape(),
        filter_order: pyramid.filter_order(),
        boundary: pyramid.boundary(),
        integration_order: pyramid.integration_order(),
        levels,
        coarse,
    };
    let json =
        serde_json::to_string_pretty(&manifest).map_err(|e| Error::Internal(e.to_string()))?;
    fs::write(dir.join(MANIFEST_NAME), json)?;
    Ok(manifest)
}

/// Reads a pyramid written by [`export_pyramid`].
pub fn import_pyramid(dir: &Path) -> Result<CoefficientPyramid> {
    let text = fs::read_to_string(dir.join(MANIFEST_NAME))?;
    let m: PyramidManifest =
        serde_json::from_str(&text).map_err(|e| Error::InvalidData(e.to_string()))?;
    let mut levels = Vec::with_capacity(m.levels.len());
    for level in &m.levels {
        let len = level.shape[0] * level.shape[1];
        let bands = level
            .bands
            .iter()
            .map(|b| read_array(&dir.join(b), len))
            .collect::<Result<Vec<_>>>()?;
        levels.push(DetailLevel {
            j: level.j,
            shape: level.shape,
            bands,
            valid: read_mask(&dir.join(&level.valid), len)?,
        });
    }
    let coarse = match &m.coarse {
        Some(c) => {
            let len = c.shape[0] * c.shape[1];
            Some(CoarseBand {
                shape: c.shape,
                values: read_array(&dir.join(&c.values), len)?,
                valid: read_mask(&dir.join(&c.valid), len)?,
            })
        }
        None => None,
    };
    CoefficientPyramid::from_parts(
        m.dim,
        m.input_shape,
        m.filter_order,
        m.boundary,
        levels,
        coarse,
        m.integration_order,
    )
    .map_err(|e| Error::InvalidData(e.to_string()))
}

/// Parses a flat TOML configuration; absent keys take their defaults and
/// unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<AnalysisConfig> {
    let config: AnalysisConfig =
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))?;
    Ok(config)
}

pub fn read_config(path: &Path) -> Result<AnalysisConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn config_to_toml(config: &AnalysisConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
}

pub fn write_config(path: &Path, config: &AnalysisConfig) -> Result<()> {
    fs::write(path, config_to_toml(config)?)?;
    Ok(())
}
