use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::stream_rng;
use crate::error::{invalid_arg, Error, Result};

/// Autocovariance of unit-variance fractional Gaussian noise.
pub(crate) fn fgn_autocov(h: f64, k: usize) -> f64 {
    let k = k as f64;
    let e = 2.0 * h;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

fn check_hurst(h: f64) -> Result<()> {
    if !(h > 0.0 && h < 1.0) {
        return invalid_arg(format!("H must lie in (0, 1), got {h}"));
    }
    Ok(())
}

fn check_power_of_two(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return invalid_arg(format!("length must be a power of two >= 2, got {n}"));
    }
    Ok(())
}

/// Exact fractional Gaussian noise of length `n` by circulant embedding
/// (Davies–Harte) of size `2n`.
pub fn fgn(h: f64, n: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    check_hurst(h)?;
    check_power_of_two(n)?;
    let m = 2 * n;
    let mut row: Vec<Complex64> = (0..m)
        .map(|k| Complex64::new(fgn_autocov(h, k.min(m - k)), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    let lambda_max = row.iter().fold(0.0f64, |a, c| a.max(c.re));
    if row.iter().any(|c| c.re < -1e-10 * lambda_max) {
        return Err(Error::Internal(
            "fGn circulant embedding is not positive".into(),
        ));
    }
    let mut rng = stream_rng(seed, stream);
    let mut w: Vec<Complex64> = row
        .iter()
        .map(|l| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            Complex64::new(a, b) * (l.re.max(0.0) / m as f64).sqrt()
        })
        .collect();
    fft.process(&mut w);
    Ok(w[..n].iter().map(|c| c.re).collect())
}

/// fBm path `X_k = sum_{i<=k} G_i` from unit-variance fGn increments.
pub fn fbm_1d(h: f64, n: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    let g = fgn(h, n, seed, stream)?;
    Ok(g.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect())
}

/// Isotropic fractional Brownian field on the `n x n` grid of `[0,1)^2`
/// by the cut-off circulant embedding of Stein. Returns row-major samples
/// with `Var(B(x) - B(y)) = 2 |x - y|^{2H}`.
pub fn fbm_2d(h: f64, n: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    check_hurst(h)?;
    check_power_of_two(n)?;
    let alpha = 2.0 * h;
    let (r, c0, c2, beta) = if alpha <= 1.5 {
        (1usize, 1.0 - alpha / 2.0, alpha / 2.0, 0.0)
    } else {
        let r = 2.0f64;
        let beta = alpha * (2.0 - alpha) / (3.0 * r * (r * r - 1.0));
        let c2 = (alpha - beta * (r - 1.0).powi(2) * (r + 2.0)) / 2.0;
        let c0 = beta * (r - 1.0).powi(3) + 1.0 - c2;
        (2usize, c0, c2, beta)
    };
    let rf = r as f64;
    let rho = |d: f64| {
        if d <= 1.0 {
            c0 - d.powf(alpha) + c2 * d * d
        } else if d <= rf {
            beta * (rf - d).powi(3) / d
        } else {
            0.0
        }
    };
    let m = r * n;
    let size = 2 * m;
    let step = 1.0 / n as f64;
    let mut grid: Vec<Complex64> = Vec::with_capacity(size * size);
    for i in 0..size {
        let di = i.min(size - i) as f64 * step;
        for k in 0..size {
            let dk = k.min(size - k) as f64 * step;
            grid.push(Complex64::new(rho((di * di + dk * dk).sqrt()), 0.0));
        }
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    fft_2d(&mut grid, size, fft.as_ref());
    let lambda_max = grid.iter().fold(0.0f64, |a, c| a.max(c.re));
    if grid.iter().any(|c| c.re < -1e-8 * lambda_max) {
        return Err(Error::Internal(
            "2D circulant embedding is not positive".into(),
        ));
    }
    let mut rng = stream_rng(seed, stream);
    let scale = 1.0 / (size * size) as f64;
    for c in grid.iter_mut() {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        *c = Complex64::new(a, b) * (c.re.max(0.0) * scale).sqrt();
    }
    fft_2d(&mut grid, size, fft.as_ref());
    let w0: f64 = rng.sample(StandardNormal);
    let w1: f64 = rng.sample(StandardNormal);
    let z0 = grid[0].re;
    let tilt = (2.0 * c2).sqrt();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for k in 0..n {
            let (y, x) = (i as f64 * step, k as f64 * step);
            out.push(grid[i * size + k].re - z0 + tilt * (x * w0 + y * w1));
        }
    }
    Ok(out)
}

fn fft_2d(data: &mut [Complex64], size: usize, fft: &dyn rustfft::Fft<f64>) {
    for row in data.chunks_mut(size) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); size];
    for k in 0..size {
        for i in 0..size {
            col[i] = data[i * size + k];
        }
        fft.process(&mut col);
        for i in 0..size {
            data[i * size + k] = col[i];
        }
    }
}
