#![allow(dead_code)]

use mfleaders::dwt::{Boundary, CoefficientPyramid, DetailLevel, WaveletFilter};
use mfleaders::Dim;

/// 1D pyramid from per-level coefficient vectors (finest first).
pub fn pyramid_1d(levels: Vec<Vec<f64>>) -> CoefficientPyramid {
    let levels = levels
        .into_iter()
        .enumerate()
        .map(|(i, v)| DetailLevel {
            j: i + 1,
            shape: [1, v.len()],
            valid: vec![true; v.len()],
            bands: vec![v],
        })
        .collect();
    CoefficientPyramid::from_levels(Dim::One, levels).unwrap()
}

/// Splits `raw` into a dyadic pyramid with `leaves` finest positions.
pub fn dyadic_from_raw(raw: &[f64], leaves: usize, levels: usize) -> CoefficientPyramid {
    let mut out = Vec::new();
    let mut offset = 0;
    for j in 0..levels {
        let len = leaves >> j;
        out.push(raw[offset..offset + len].to_vec());
        offset += len;
    }
    pyramid_1d(out)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Level-`j` analysis filter from convolving upsampled taps.
fn equivalent_filter(filter: &WaveletFilter, j: usize) -> Vec<f64> {
    let upsample = |taps: &[f64], factor: usize| -> Vec<f64> {
        let mut out = vec![0.0; (taps.len() - 1) * factor + 1];
        for (i, t) in taps.iter().enumerate() {
            out[i * factor] = *t;
        }
        out
    };
    let convolve = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (k, y) in b.iter().enumerate() {
                out[i + k] += x * y;
            }
        }
        out
    };
    let mut eq = vec![1.0];
    for l in 1..j {
        eq = convolve(&eq, &upsample(filter.lowpass(), 1 << (l - 1)));
    }
    convolve(&eq, &upsample(filter.highpass(), 1 << (j - 1)))
}

/// Inner product of periodic samples with the centered level-`j` wavelet at
/// `k`, L1 normalized.
pub fn direct_coefficient(x: &[f64], filter: &WaveletFilter, j: usize, k: usize) -> f64 {
    let n = x.len() as isize;
    let shift = (filter.len() / 2) as isize - 1;
    let offset = ((1isize << j) - 1) * shift;
    let acc: f64 = equivalent_filter(filter, j)
        .iter()
        .enumerate()
        .map(|(t, w)| w * x[(((k as isize) << j) + t as isize - offset).rem_euclid(n) as usize])
        .sum();
    acc * 2f64.powf(-(j as f64) / 2.0)
}

/// Leader of a 1D pyramid by enumerating every finer cube inside the three
/// neighbours at level `j`; `None` when a neighbour is missing or masked.
pub fn exhaustive_leader_1d(p: &CoefficientPyramid, j: usize, k: usize) -> Option<f64> {
    let cols = p.level(j).unwrap().shape[1];
    let wrap = p.boundary() == Boundary::Periodic;
    let mut m = 0.0f64;
    let mut ok = true;
    for dk in [-1isize, 0, 1] {
        let t = k as isize + dk;
        let nk = if wrap {
            t.rem_euclid(cols as isize) as usize
        } else if (0..cols as isize).contains(&t) {
            t as usize
        } else {
            ok = false;
            continue;
        };
        for jf in 1..=j {
            let span = 1usize << (j - jf);
            let fl = p.level(jf).unwrap();
            for fk in nk * span..(nk + 1) * span {
                m = m.max(fl.max_abs_at(fk));
                ok &= fl.valid[fk];
            }
        }
    }
    ok.then_some(m)
}
