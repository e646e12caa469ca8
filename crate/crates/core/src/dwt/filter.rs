use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};

pub const MAX_ORDER: usize = 20;

/// Orthonormal Daubechies filter pair with `order` vanishing moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletFilter {
    order: usize,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
}

impl WaveletFilter {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    pub fn len(&self) -> usize {
        self.lowpass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass.is_empty()
    }

    /// Approximate Hölder regularity of the Daubechies wavelet of this order.
    pub fn regularity(&self) -> f64 {
        const TABLE: [f64; 10] = [
            0.0, 0.550, 1.088, 1.618, 1.969, 2.189, 2.460, 2.761, 3.074, 3.381,
        ];
        TABLE
            .get(self.order - 1)
            .copied()
            .unwrap_or(0.2075 * self.order as f64)
    }
}

/// Minimum-phase Daubechies filter obtained by spectral factorization.
///
/// The halfband polynomial `P(y) = sum_{k<N} C(N-1+k, k) y^k`, with
/// `y = sin^2(w/2)`, is factored and every root `y_i` is mapped to the
/// root `z_i` of `z^2 - (2 - 4 y_i) z + 1` lying inside the unit disk.
/// The lowpass taps are the coefficients of `(1+z)^N prod (z - z_i)`
/// read from the highest power down, scaled to sum to `sqrt(2)`.
pub fn design_daubechies_filter(order: usize) -> Result<WaveletFilter> {
    if !(1..=MAX_ORDER).contains(&order) {
        return invalid_arg(format!(
            "filter order must be in 1..={MAX_ORDER}, got {order}"
        ));
    }
    let halfband: Vec<f64> = (0..order).map(|k| binomial(order - 1 + k, k)).collect();
    let y_roots = polynomial_roots(&halfband);

    let mut poly = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..order {
        poly = poly_mul(&poly, &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
    }
    for y in y_roots {
        let z = inner_z_root(y);
        poly = poly_mul(&poly, &[-z, Complex64::new(1.0, 0.0)]);
    }

    let mut lowpass: Vec<f64> = poly.iter().rev().map(|c| c.re).collect();
    let sum: f64 = lowpass.iter().sum();
    let scale = std::f64::consts::SQRT_2 / sum;
    lowpass.iter_mut().for_each(|t| *t *= scale);

    let highpass = quadrature_mirror(&lowpass);
    Ok(WaveletFilter {
        order,
        lowpass,
        highpass,
    })
}

/// `g[k] = (-1)^k h[L-1-k]`.
pub(crate) fn quadrature_mirror(lowpass: &[f64]) -> Vec<f64> {
    let len = lowpass.len();
    (0..len)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * lowpass[len - 1 - k]
        })
        .collect()
}

pub(crate) fn inner_z_root(y: Complex64) -> Complex64 {
    let b = Complex64::new(1.0, 0.0) - 2.0 * y;
    let disc = (b * b - 1.0).sqrt();
    let z1 = b + disc;
    let z2 = b - disc;
    if z1.norm() < z2.norm() {
        z1
    } else {
        z2
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

pub(crate) fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (k, &y) in b.iter().enumerate() {
            out[i + k] += x * y;
        }
    }
    out
}

fn poly_eval(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    // Horner for value and derivative; coefficients ascending.
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// All complex roots of a real polynomial given by ascending coefficients
/// (Aberth–Ehrlich iteration followed by Newton polishing).
pub(crate) fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    let lead = coeffs[degree];
    let monic: Vec<f64> = coeffs.iter().map(|c| c / lead).collect();

    // Cauchy bound for the initial circle.
    let radius = 1.0 + monic[..degree].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / degree as f64;
            Complex64::from_polar(0.5 * radius, angle)
        })
        .collect();

    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..degree {
            let (p, dp) = poly_eval(&monic, roots[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..degree)
                .filter(|&k| k != i)
                .map(|k| 1.0 / (roots[i] - roots[k]))
                .sum();
            let step = ratio / (1.0 - ratio * repulsion);
            roots[i] -= step;
            max_step = max_step.max(step.norm() / roots[i].norm().max(1.0));
        }
        if max_step < 1e-16 {
            break;
        }
    }

    for root in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = poly_eval(&monic, *root);
            if dp.norm() == 0.0 {
                break;
            }
            *root -= p / dp;
        }
    }
    roots
}
