//! Increment and oscillation atoms computed directly from samples.

use crate::atoms::{AtomLevel, AtomLevels};
use crate::error::{invalid_arg, Result};
use crate::signal::{Dim, Signal};

/// Increments of order `order` at lag `2^j` taken on the grid of multiples
/// of the lag; in 2D row and column increments are pooled.
pub fn increment_atoms(signal: &Signal, order: usize, max_level: usize) -> Result<AtomLevels> {
    if order == 0 {
        return invalid_arg("increments need order_of_difference >= 1");
    }
    check_levels(max_level)?;
    let weights = difference_weights(order);
    let (rows, cols) = (signal.rows(), signal.cols());
    let x = signal.samples();
    let mut levels = Vec::with_capacity(max_level);
    for j in 1..=max_level {
        let lag = 1usize << j;
        let reach = order * lag;
        let mut values = Vec::new();
        let mut coords = Vec::new();
        let row_starts: Vec<usize> = match signal.dim() {
            Dim::One => vec![0],
            Dim::Two => (0..rows).step_by(lag).collect(),
        };
        for &r in &row_starts {
            for c in (0..cols).step_by(lag).take_while(|c| c + reach < cols) {
                let v = weights
                    .iter()
                    .enumerate()
                    .map(|(i, w)| w * x[r * cols + c + i * lag])
                    .sum();
                values.push(v);
                coords.push([r / lag, c / lag]);
            }
        }
        if signal.dim() == Dim::Two {
            for r in (0..rows).step_by(lag).take_while(|r| r + reach < rows) {
                for c in (0..cols).step_by(lag) {
                    let v = weights
                        .iter()
                        .enumerate()
                        .map(|(i, w)| w * x[(r + i * lag) * cols + c])
                        .sum();
                    values.push(v);
                    coords.push([r / lag, c / lag]);
                }
            }
        }
        if values.is_empty() {
            return invalid_arg(format!("no increment of lag {lag} fits in the signal"));
        }
        levels.push(AtomLevel { j, values, coords });
    }
    Ok(AtomLevels {
        dim: signal.dim(),
        levels,
    })
}

/// Oscillations `sup - inf` over the samples of each closed dyadic cube of
/// side `2^j` (the cube's far edge included). Cubes without a far edge in
/// the data are skipped.
///
/// The second-order variant (1D only) takes
/// `sup |f(x+h) - 2 f(x) + f(x-h)|` over the cube instead.
pub fn oscillation_atoms(
    signal: &Signal,
    second_order: bool,
    max_level: usize,
) -> Result<AtomLevels> {
    check_levels(max_level)?;
    if second_order && signal.dim() == Dim::Two {
        return invalid_arg("second-order oscillation is only available in 1D");
    }
    let levels = if second_order {
        second_order_oscillations(signal.samples(), max_level)?
    } else {
        first_order_oscillations(signal, max_level)?
    };
    Ok(AtomLevels {
        dim: signal.dim(),
        levels,
    })
}

fn check_levels(max_level: usize) -> Result<()> {
    if max_level == 0 {
        return invalid_arg("max_level must be at least 1");
    }
    Ok(())
}

fn difference_weights(order: usize) -> Vec<f64> {
    // (-1)^(order-i) C(order, i)
    let mut w = vec![1.0f64];
    for _ in 0..order {
        let mut next = vec![0.0; w.len() + 1];
        for (i, c) in w.iter().enumerate() {
            next[i] -= c;
            next[i + 1] += c;
        }
        w = next;
    }
    w
}

fn first_order_oscillations(signal: &Signal, max_level: usize) -> Result<Vec<AtomLevel>> {
    let (rows, cols) = (signal.rows(), signal.cols());
    let x = signal.samples();
    let two_d = signal.dim() == Dim::Two;
    // Closed cubes of side 1: samples {k, k+1} (and the 2x2 block in 2D).
    let (mut shape, mut lo, mut hi) = {
        let r = if two_d { rows - 1 } else { 1 };
        let c = cols - 1;
        let mut lo = vec![0.0; r * c];
        let mut hi = vec![0.0; r * c];
        for i in 0..r {
            for k in 0..c {
                let mut block = vec![x[i * cols + k], x[i * cols + k + 1]];
                if two_d {
                    block.push(x[(i + 1) * cols + k]);
                    block.push(x[(i + 1) * cols + k + 1]);
                }
                lo[i * c + k] = block.iter().cloned().fold(f64::INFINITY, f64::min);
                hi[i * c + k] = block.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            }
        }
        ([r, c], lo, hi)
    };
    let mut levels = Vec::with_capacity(max_level);
    for j in 1..=max_level {
        let r = if two_d { shape[0] / 2 } else { 1 };
        let c = shape[1] / 2;
        if r == 0 || c == 0 {
            return invalid_arg(format!(
                "no closed cube of side {} fits in the signal",
                1usize << j
            ));
        }
        let mut nlo = vec![0.0; r * c];
        let mut nhi = vec![0.0; r * c];
        let child_rows: &[usize] = if two_d { &[0, 1] } else { &[0] };
        for i in 0..r {
            for k in 0..c {
                let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
                for &dr in child_rows {
                    let ci = if two_d { 2 * i + dr } else { 0 };
                    for ck in [2 * k, 2 * k + 1] {
                        a = a.min(lo[ci * shape[1] + ck]);
                        b = b.max(hi[ci * shape[1] + ck]);
                    }
                }
                nlo[i * c + k] = a;
                nhi[i * c + k] = b;
            }
        }
        let values = nhi.iter().zip(&nlo).map(|(h, l)| h - l).collect();
        let coords = (0..r * c).map(|idx| [idx / c, idx % c]).collect();
        levels.push(AtomLevel { j, values, coords });
        shape = [r, c];
        lo = nlo;
        hi = nhi;
    }
    Ok(levels)
}

fn second_order_oscillations(x: &[f64], max_level: usize) -> Result<Vec<AtomLevel>> {
    let n = x.len();
    let mut levels = Vec::with_capacity(max_level);
    for j in 1..=max_level {
        let side = 1usize << j;
        let cubes = (n - 1) / side;
        if cubes == 0 {
            return invalid_arg(format!("no closed cube of side {side} fits in the signal"));
        }
        let values = (0..cubes)
            .map(|k| {
                let (a, b) = (k * side, (k + 1) * side);
                let mut sup = 0.0f64;
                for mid in a + 1..b {
                    for h in 1..=(mid - a).min(b - mid) {
                        sup = sup.max((x[mid + h] - 2.0 * x[mid] + x[mid - h]).abs());
                    }
                }
                sup
            })
            .collect();
        let coords = (0..cubes).map(|k| [0, k]).collect();
        levels.push(AtomLevel { j, values, coords });
    }
    Ok(levels)
}
