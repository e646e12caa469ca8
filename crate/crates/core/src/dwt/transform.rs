use serde::{Deserialize, Serialize};

use super::{CoarseBand, CoefficientPyramid, DetailLevel, WaveletFilter};
use crate::error::{invalid_arg, Error, Result};
use crate::signal::{Dim, Signal};

/// Border handling of the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Circular extension; every position is valid.
    Periodic,
    /// Circular extension, but positions whose support wraps are masked.
    Discard,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "discard" => Ok(Boundary::Discard),
            other => invalid_arg(format!("unknown boundary '{other}'")),
        }
    }
}

/// Deepest level allowed for an axis of the given length.
pub fn max_level_for(min_axis: usize) -> usize {
    let log2 = usize::BITS - 1 - min_axis.max(1).leading_zeros();
    (log2 as usize).saturating_sub(2)
}

/// Forward fast wavelet transform down to `max_level`.
///
/// The filters are centered: position `k` of level `j` uses samples around
/// the dyadic interval `[k 2^j, (k+1) 2^j)`, which keeps parents, children
/// and neighbours spatially aligned for leader computation.
pub fn dwt_forward(
    signal: &Signal,
    filter: &WaveletFilter,
    max_level: usize,
    boundary: Boundary,
) -> Result<CoefficientPyramid> {
    if let Some(bad) = signal.samples().iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!("non-finite sample {bad}")));
    }
    let deepest = max_level_for(signal.min_axis());
    if max_level == 0 || max_level > deepest {
        return invalid_arg(format!(
            "max_level must be in 1..={deepest} for axis length {}, got {max_level}",
            signal.min_axis()
        ));
    }
    match signal.dim() {
        Dim::One => Ok(forward_1d(signal, filter, max_level, boundary)),
        Dim::Two => Ok(forward_2d(signal, filter, max_level, boundary)),
    }
}

struct Step {
    approx: Vec<f64>,
    detail: Vec<f64>,
    valid: Vec<bool>,
}

/// One analysis step along a line of samples.
fn step_line(input: &[f64], valid: &[bool], filter: &WaveletFilter, boundary: Boundary) -> Step {
    let len = input.len();
    let out_len = len / 2;
    let lo = filter.lowpass();
    let hi = filter.highpass();
    let shift = (lo.len() / 2) as isize - 1;
    let mut approx = vec![0.0; out_len];
    let mut detail = vec![0.0; out_len];
    let mut ok = vec![true; out_len];
    for k in 0..out_len {
        let mut a = 0.0;
        let mut d = 0.0;
        let mut is_valid = true;
        for (m, (&h, &g)) in lo.iter().zip(hi).enumerate() {
            let idx = 2 * k as isize + m as isize - shift;
            let wrapped = idx.rem_euclid(len as isize) as usize;
            if boundary == Boundary::Discard && (idx < 0 || idx >= len as isize) {
                is_valid = false;
            }
            is_valid &= valid[wrapped];
            a += h * input[wrapped];
            d += g * input[wrapped];
        }
        approx[k] = a;
        detail[k] = d;
        ok[k] = is_valid;
    }
    Step {
        approx,
        detail,
        valid: ok,
    }
}

fn forward_1d(
    signal: &Signal,
    filter: &WaveletFilter,
    max_level: usize,
    boundary: Boundary,
) -> CoefficientPyramid {
    let mut approx = signal.samples().to_vec();
    let mut valid = vec![true; approx.len()];
    let mut levels = Vec::with_capacity(max_level);
    for j in 1..=max_level {
        let step = step_line(&approx, &valid, filter, boundary);
        let norm = 2f64.powf(-(j as f64) / 2.0);
        let detail: Vec<f64> = step.detail.iter().map(|c| c * norm).collect();
        levels.push(DetailLevel {
            j,
            shape: [1, detail.len()],
            bands: vec![detail],
            valid: step.valid.clone(),
        });
        approx = step.approx;
        valid = step.valid;
    }
    let coarse = CoarseBand {
        shape: [1, approx.len()],
        values: approx,
        valid,
    };
    CoefficientPyramid::from_transform(
        Dim::One,
        [1, signal.len()],
        filter.order(),
        boundary,
        levels,
        coarse,
    )
}

/// Separable step: rows first, then columns of both row outputs.
fn step_2d(
    input: &[f64],
    valid: &[bool],
    rows: usize,
    cols: usize,
    filter: &WaveletFilter,
    boundary: Boundary,
) -> ([usize; 2], Vec<f64>, [Vec<f64>; 3], Vec<bool>) {
    let half_c = cols / 2;
    let half_r = rows / 2;
    let mut row_lo = vec![0.0; rows * half_c];
    let mut row_hi = vec![0.0; rows * half_c];
    let mut row_valid = vec![false; rows * half_c];
    for r in 0..rows {
        let line = &input[r * cols..(r + 1) * cols];
        let vline = &valid[r * cols..(r + 1) * cols];
        let step = step_line(line, vline, filter, boundary);
        row_lo[r * half_c..(r + 1) * half_c].copy_from_slice(&step.approx);
        row_hi[r * half_c..(r + 1) * half_c].copy_from_slice(&step.detail);
        row_valid[r * half_c..(r + 1) * half_c].copy_from_slice(&step.valid);
    }

    let n_out = half_r * half_c;
    let mut ll = vec![0.0; n_out];
    let mut lh = vec![0.0; n_out];
    let mut hl = vec![0.0; n_out];
    let mut hh = vec![0.0; n_out];
    let mut out_valid = vec![false; n_out];
    let mut col_lo = vec![0.0; rows];
    let mut col_hi = vec![0.0; rows];
    let mut col_valid = vec![false; rows];
    for c in 0..half_c {
        for r in 0..rows {
            col_lo[r] = row_lo[r * half_c + c];
            col_hi[r] = row_hi[r * half_c + c];
            col_valid[r] = row_valid[r * half_c + c];
        }
        let low = step_line(&col_lo, &col_valid, filter, boundary);
        let high = step_line(&col_hi, &col_valid, filter, boundary);
        for r in 0..half_r {
            let idx = r * half_c + c;
            ll[idx] = low.approx[r];
            lh[idx] = low.detail[r];
            hl[idx] = high.approx[r];
            hh[idx] = high.detail[r];
            out_valid[idx] = low.valid[r];
        }
    }
    ([half_r, half_c], ll, [lh, hl, hh], out_valid)
}

fn forward_2d(
    signal: &Signal,
    filter: &WaveletFilter,
    max_level: usize,
    boundary: Boundary,
) -> CoefficientPyramid {
    let mut rows = signal.rows();
    let mut cols = signal.cols();
    let mut approx = signal.samples().to_vec();
    let mut valid = vec![true; approx.len()];
    let mut levels = Vec::with_capacity(max_level);
    for j in 1..=max_level {
        let (shape, ll, bands, vmask) = step_2d(&approx, &valid, rows, cols, filter, boundary);
        let norm = 2f64.powi(-(j as i32));
        let bands = bands
            .into_iter()
            .map(|b| b.into_iter().map(|c| c * norm).collect())
            .collect();
        levels.push(DetailLevel {
            j,
            shape,
            bands,
            valid: vmask.clone(),
        });
        rows = shape[0];
        cols = shape[1];
        approx = ll;
        valid = vmask;
    }
    let coarse = CoarseBand {
        shape: [rows, cols],
        values: approx,
        valid,
    };
    CoefficientPyramid::from_transform(
        Dim::Two,
        [signal.rows(), signal.cols()],
        filter.order(),
        boundary,
        levels,
        coarse,
    )
}
