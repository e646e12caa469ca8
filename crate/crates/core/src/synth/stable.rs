use rand::Rng;
use rand_distr::Exp1;

use super::stream_rng;
use crate::error::{invalid_arg, Result};

/// Symmetric standard alpha-stable variate (Chambers–Mallows–Stuck).
/// For `alpha = 2` this is Gaussian with variance 2.
pub fn symmetric_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let v = half_pi * (2.0 * rng.random::<f64>() - 1.0);
    let w: f64 = rng.sample(Exp1);
    if alpha == 1.0 {
        return v.tan();
    }
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    a * ((v * (1.0 - alpha)).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Cumulative sum of `n` i.i.d. symmetric alpha-stable increments.
pub fn levy_stable(alpha: f64, n: usize, seed: u64, stream: u64) -> Result<Vec<f64>> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return invalid_arg(format!("alpha must lie in (1, 2], got {alpha}"));
    }
    if n < 2 {
        return invalid_arg("length must be at least 2");
    }
    let mut rng = stream_rng(seed, stream);
    let mut acc = 0.0;
    Ok((0..n)
        .map(|_| {
            acc += symmetric_stable(alpha, &mut rng);
            acc
        })
        .collect())
}
