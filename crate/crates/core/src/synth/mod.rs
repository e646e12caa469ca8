//! Seeded generators of scaling processes with their theoretical scaling
//! functions and spectra.
//!
//! Randomness comes from ChaCha8 seeded with `seed` and a per-component
//! stream id, so every realization is a pure function of `(spec, seed)`.

mod cascade;
mod fbm;
mod stable;
mod weierstrass;

pub use cascade::{
    cascade_masses, distribution_function, fbm_mf_time, periodic_distribution_function,
    CascadeSpec, Multiplier, MF_TIME_OVERSAMPLING,
};
pub use fbm::{fbm_1d, fbm_2d, fgn};
pub use stable::{levy_stable, symmetric_stable};
pub use weierstrass::{weierstrass, WeierstrassVariant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};
use crate::signal::Signal;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Fbm1d {
        h: f64,
        n: usize,
    },
    Fbm2d {
        h: f64,
        n: usize,
    },
    Weierstrass {
        a: f64,
        h: f64,
        n: usize,
        variant: WeierstrassVariant,
    },
    /// Masses of the `c^J` cells of the cascade.
    Cascade(CascadeSpec),
    FbmMfTime {
        h: f64,
        cascade: CascadeSpec,
        n: usize,
    },
    LevyStable {
        alpha: f64,
        n: usize,
    },
    SquareOf {
        inner: Box<GeneratorSpec>,
    },
}

/// Theoretical scaling model of a generator (d = 1 unless stated).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GroundTruth {
    /// `zeta(p) = H p`, spectrum the point `(H, d)`.
    Monofractal { h: f64, d: usize },
    /// Cell masses of a cascade; `zeta(q) = -log_c E[w^q]`.
    Cascade { cascade: CascadeSpec },
    /// `B_H(F(t))`: `zeta(p) = zeta_F(H p)`, `D(h) = D_F(h / H)`.
    TimeChanged { h: f64, cascade: CascadeSpec },
    /// `eta(p) = zeta(p) = p / alpha` up to `p = alpha`, then 1.
    Stable { alpha: f64 },
    /// Square of fBm: points `(H, 1)` and `(2H, 1 - H)`.
    SquaredFbm { h: f64 },
    /// Any model shifted by pseudo-fractional integration of order `s`.
    Integrated { inner: Box<GroundTruth>, s: f64 },
}

impl GroundTruth {
    pub fn d(&self) -> f64 {
        match self {
            GroundTruth::Monofractal { d, .. } => *d as f64,
            GroundTruth::Integrated { inner, .. } => inner.d(),
            _ => 1.0,
        }
    }

    pub fn integrated(self, s: f64) -> Self {
        GroundTruth::Integrated {
            inner: Box::new(self),
            s,
        }
    }

    pub fn zeta(&self, p: f64) -> f64 {
        match self {
            GroundTruth::Monofractal { h, .. } => h * p,
            GroundTruth::Cascade { cascade } => cascade.zeta_masses(p),
            GroundTruth::TimeChanged { h, cascade } => cascade.zeta_distribution(h * p),
            GroundTruth::Stable { alpha } => {
                if p <= *alpha {
                    p / alpha
                } else {
                    1.0
                }
            }
            GroundTruth::SquaredFbm { h } => {
                if p >= -1.0 {
                    h * p
                } else {
                    h * (1.0 + 2.0 * p)
                }
            }
            GroundTruth::Integrated { inner, s } => inner.zeta(p) + s * p,
        }
    }

    /// Spectrum `D(h)`; `-inf` off the support of point and piecewise
    /// models, the Legendre transform of `zeta` for cascades.
    pub fn spectrum(&self, h: f64) -> f64 {
        match self {
            GroundTruth::Monofractal { h: hh, d } => {
                if (h - hh).abs() < 1e-12 {
                    *d as f64
                } else {
                    f64::NEG_INFINITY
                }
            }
            GroundTruth::Stable { alpha } => {
                if (0.0..=1.0 / alpha).contains(&h) {
                    alpha * h
                } else {
                    f64::NEG_INFINITY
                }
            }
            GroundTruth::SquaredFbm { h: hh } => {
                if (*hh..=2.0 * hh).contains(&h) {
                    1.0 - (h - hh)
                } else {
                    f64::NEG_INFINITY
                }
            }
            GroundTruth::Cascade { .. } | GroundTruth::TimeChanged { .. } => {
                legendre_of(|q| self.zeta(q), self.d(), h)
            }
            GroundTruth::Integrated { inner, s } => inner.spectrum(h - s),
        }
    }

    /// Smallest Hölder exponent present, `sup_{q>0} (zeta(q) - d) / q` for
    /// cascades.
    pub fn h_min(&self) -> f64 {
        match self {
            GroundTruth::Monofractal { h, .. } | GroundTruth::SquaredFbm { h } => *h,
            GroundTruth::Stable { .. } => 0.0,
            GroundTruth::Cascade { .. } | GroundTruth::TimeChanged { .. } => {
                let d = self.d();
                (1..=40_000)
                    .map(|i| {
                        let q = i as f64 * 0.005;
                        (self.zeta(q) - d) / q
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            GroundTruth::Integrated { inner, s } => inner.h_min() + s,
        }
    }
}

/// `inf_q (d + h q - zeta(q))` for concave `zeta`, by ternary search on
/// `q` in `[-200, 200]`.
fn legendre_of(zeta: impl Fn(f64) -> f64, d: f64, h: f64) -> f64 {
    let f = |q: f64| d + h * q - zeta(q);
    let (mut a, mut b) = (-200.0f64, 200.0f64);
    for _ in 0..200 {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    f(0.5 * (a + b))
}

/// Generated signal with its theoretical model.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub signal: Signal,
    pub truth: GroundTruth,
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return invalid_arg("length must be at least 2");
    }
    Ok(())
}

/// Runs the generator of `spec` with `seed`.
pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Synthesis> {
    let (signal, truth) = match spec {
        GeneratorSpec::Fbm1d { h, n } => (
            Signal::new_1d(fbm_1d(*h, *n, seed, 0)?)?,
            GroundTruth::Monofractal { h: *h, d: 1 },
        ),
        GeneratorSpec::Fbm2d { h, n } => (
            Signal::new_2d(*n, *n, fbm_2d(*h, *n, seed, 0)?)?,
            GroundTruth::Monofractal { h: *h, d: 2 },
        ),
        GeneratorSpec::Weierstrass { a, h, n, variant } => {
            check_n(*n)?;
            (
                Signal::new_1d(weierstrass(*a, *h, *n, *variant)?)?,
                GroundTruth::Monofractal { h: *h, d: 1 },
            )
        }
        GeneratorSpec::Cascade(cascade) => (
            Signal::new_1d(cascade_masses(cascade, seed, 0)?)?,
            GroundTruth::Cascade {
                cascade: cascade.clone(),
            },
        ),
        GeneratorSpec::FbmMfTime { h, cascade, n } => (
            Signal::new_1d(fbm_mf_time(*h, cascade, *n, seed)?)?,
            GroundTruth::TimeChanged {
                h: *h,
                cascade: cascade.clone(),
            },
        ),
        GeneratorSpec::LevyStable { alpha, n } => (
            Signal::new_1d(levy_stable(*alpha, *n, seed, 0)?)?,
            GroundTruth::Stable { alpha: *alpha },
        ),
        GeneratorSpec::SquareOf { inner } => {
            let base = generate(inner, seed)?;
            let truth = match base.truth {
                GroundTruth::Monofractal { h, d: 1 } => GroundTruth::SquaredFbm { h },
                other => other,
            };
            (transform_square(&base.signal), truth)
        }
    };
    Ok(Synthesis { signal, truth })
}

/// Element-wise square.
pub fn transform_square(signal: &Signal) -> Signal {
    signal.map(|x| x * x)
}
