use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use super::fbm::fbm_1d;
use super::stream_rng;
use crate::error::{invalid_arg, Error, Result};

/// Multiplier law of a cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Multiplier {
    /// `ln w ~ N(mu, sigma2)`; mean 1 requires `mu = -sigma2 / 2`.
    LogNormal { mu: f64, sigma2: f64 },
    /// `w = beta^pi e^gamma`, `pi ~ Poisson(lambda)`; mean 1 requires
    /// `gamma = lambda (1 - beta)`.
    LogPoisson { lambda: f64, beta: f64, gamma: f64 },
    /// Fixed mass fractions of the children, summing to 1.
    Deterministic { weights: Vec<f64> },
}

impl Multiplier {
    pub fn log_normal(sigma2: f64) -> Self {
        Multiplier::LogNormal {
            mu: -sigma2 / 2.0,
            sigma2,
        }
    }

    /// Log-normal law whose distribution function has second log-cumulant
    /// `c2 < 0` for branching `c`.
    pub fn log_normal_for_c2(c2: f64, branching: usize) -> Self {
        Self::log_normal(-c2 * (branching as f64).ln())
    }

    pub fn log_poisson(lambda: f64, beta: f64) -> Self {
        Multiplier::LogPoisson {
            lambda,
            beta,
            gamma: lambda * (1.0 - beta),
        }
    }

    /// She–Lévêque parameters for a dyadic cascade.
    pub fn she_leveque() -> Self {
        Self::log_poisson(2.0 * std::f64::consts::LN_2, 2.0 / 3.0)
    }

    /// Uniform split: every cell keeps the Lebesgue measure.
    pub fn uniform(branching: usize) -> Self {
        Multiplier::Deterministic {
            weights: vec![1.0 / branching as f64; branching],
        }
    }

    pub fn validate(&self, branching: usize) -> Result<()> {
        match self {
            Multiplier::LogNormal { mu, sigma2 } => {
                if !(sigma2.is_finite() && *sigma2 >= 0.0) {
                    return invalid_arg("log-normal variance must be finite and non-negative");
                }
                if (mu + sigma2 / 2.0).abs() > 1e-12 {
                    return invalid_arg("log-normal multipliers must have mean 1 (mu = -sigma2/2)");
                }
            }
            Multiplier::LogPoisson {
                lambda,
                beta,
                gamma,
            } => {
                if !(*lambda > 0.0 && lambda.is_finite()) {
                    return invalid_arg("log-Poisson lambda must be positive");
                }
                if !(*beta > 0.0 && *beta <= 1.0) {
                    return invalid_arg("log-Poisson beta must lie in (0, 1]");
                }
                if (gamma - lambda * (1.0 - beta)).abs() > 1e-12 {
                    return invalid_arg("log-Poisson multipliers must have mean 1");
                }
            }
            Multiplier::Deterministic { weights } => {
                if weights.len() != branching {
                    return invalid_arg(format!(
                        "{} weights given for branching {branching}",
                        weights.len()
                    ));
                }
                if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
                    return invalid_arg("cascade weights must be positive");
                }
                if (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                    return invalid_arg("deterministic cascade weights must sum to 1");
                }
            }
        }
        Ok(())
    }

    /// `log_c E[w^q]` for the mean-1 multiplier `w` (for deterministic
    /// splits `w = c p_i` with `i` uniform).
    pub fn log_moment(&self, q: f64, branching: usize) -> f64 {
        let ln_c = (branching as f64).ln();
        match self {
            Multiplier::LogNormal { mu, sigma2 } => (q * mu + q * q * sigma2 / 2.0) / ln_c,
            Multiplier::LogPoisson {
                lambda,
                beta,
                gamma,
            } => (q * gamma + lambda * (beta.powf(q) - 1.0)) / ln_c,
            Multiplier::Deterministic { weights } => {
                let c = branching as f64;
                let mean: f64 = weights.iter().map(|p| (c * p).powf(q)).sum::<f64>() / c;
                mean.ln() / ln_c
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    pub branching: usize,
    pub multiplier: Multiplier,
    pub depth: usize,
}

impl CascadeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.branching < 2 {
            return invalid_arg("branching must be at least 2");
        }
        let cells = (self.branching as f64).powi(self.depth as i32);
        if self.depth == 0 || cells > (1u64 << 20) as f64 {
            return invalid_arg(format!(
                "depth {} gives {cells} cells; at most 2^20 cells are supported",
                self.depth
            ));
        }
        self.multiplier.validate(self.branching)
    }

    pub fn cells(&self) -> usize {
        self.branching.pow(self.depth as u32)
    }

    /// Scaling function of the distribution function `F`:
    /// `zeta_F(q) = q - log_c E[w^q]`.
    pub fn zeta_distribution(&self, q: f64) -> f64 {
        q - self.multiplier.log_moment(q, self.branching)
    }

    /// Scaling function of the sequence of cell masses seen as a sampled
    /// signal: `-log_c E[w^q]`.
    pub fn zeta_masses(&self, q: f64) -> f64 {
        -self.multiplier.log_moment(q, self.branching)
    }

    /// Partition exponent `tau(q)`: `sum_I mu(I)^q ~ |I|^tau(q)` over cells
    /// of one generation, `tau(q) = q - 1 - log_c E[w^q]`.
    pub fn partition_tau(&self, q: f64) -> f64 {
        q - 1.0 - self.multiplier.log_moment(q, self.branching)
    }
}

/// Masses of the `c^J` cells of the depth-`J` cascade; cell `k` covers
/// `[k c^{-J}, (k+1) c^{-J})`.
pub fn cascade_masses(spec: &CascadeSpec, seed: u64, stream: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let c = spec.branching;
    let mut rng = stream_rng(seed, stream);
    let mut masses = vec![1.0];
    for _ in 0..spec.depth {
        let mut next = Vec::with_capacity(masses.len() * c);
        for m in &masses {
            for i in 0..c {
                let w = draw(&spec.multiplier, c, i, &mut rng);
                next.push(m * w / c as f64);
            }
        }
        masses = next;
    }
    Ok(masses)
}

fn draw<R: Rng + ?Sized>(multiplier: &Multiplier, c: usize, child: usize, rng: &mut R) -> f64 {
    match multiplier {
        Multiplier::LogNormal { mu, sigma2 } => {
            if *sigma2 == 0.0 {
                return 1.0;
            }
            let normal = Normal::new(*mu, sigma2.sqrt()).expect("validated variance");
            normal.sample(rng).exp()
        }
        Multiplier::LogPoisson {
            lambda,
            beta,
            gamma,
        } => {
            let poisson = Poisson::new(*lambda).expect("validated rate");
            let k: f64 = poisson.sample(rng);
            beta.powf(k) * gamma.exp()
        }
        Multiplier::Deterministic { weights } => c as f64 * weights[child],
    }
}

/// Distribution function at the cell edges: `F[0] = 0`,
/// `F[k] = sum of the first k masses`.
pub fn distribution_function(masses: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(masses.len() + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for m in masses {
        acc += m;
        out.push(acc);
    }
    out
}

/// `F(t) - t` for the cascade measure normalized to unit mass, after a
/// circular shift of the cells by `shift`, at the `n` cell edges `t = k/n`.
///
/// The result closes up continuously at the ends, so it can be analysed
/// with a periodic boundary, and the shift breaks the alignment of the
/// cascade's dyadic grid with the wavelet grid. Wavelets with at least two
/// vanishing moments do not see the linear term.
pub fn periodic_distribution_function(masses: &[f64], shift: usize) -> Result<Vec<f64>> {
    let n = masses.len();
    if n == 0 {
        return Err(Error::InvalidData("no cascade cell".into()));
    }
    if masses.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::InvalidData(
            "cascade masses must be finite and non-negative".into(),
        ));
    }
    let mut rotated = masses.to_vec();
    rotated.rotate_left(shift % n);
    let f = distribution_function(&rotated);
    let total = f[n];
    if total <= 0.0 {
        return Err(Error::InvalidData("cascade has zero total mass".into()));
    }
    Ok((0..n).map(|k| f[k] / total - k as f64 / n as f64).collect())
}

/// Oversampling of the fBm grid relative to the output length.
pub const MF_TIME_OVERSAMPLING: usize = 16;

/// `X_k = B_H(F(k/n))` with `F` the normalized cascade distribution
/// function and `B_H` evaluated at the nearest point of a grid
/// [`MF_TIME_OVERSAMPLING`] times finer than the output.
pub fn fbm_mf_time(h: f64, cascade: &CascadeSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    cascade.validate()?;
    let cells = cascade.cells();
    let fine = MF_TIME_OVERSAMPLING * n;
    if cells < n || cells > fine {
        return invalid_arg(format!(
            "cascade with {cells} cells needs n <= cells <= {MF_TIME_OVERSAMPLING} n (n = {n})"
        ));
    }
    let masses = cascade_masses(cascade, seed, 1)?;
    let f = distribution_function(&masses);
    let total = f[cells];
    let b = {
        let mut path = vec![0.0];
        path.extend(fbm_1d(h, fine, seed, 2)?);
        path
    };
    // Rescale so that the grid spans [0, 1] with fine steps.
    Ok((0..n)
        .map(|k| {
            let t = f[k * cells / n] / total;
            b[(t * fine as f64).round() as usize]
        })
        .collect())
}
