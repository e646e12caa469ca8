use serde::{Deserialize, Serialize};

use super::Boundary;
use crate::atoms::{AtomLevel, AtomLevels};
use crate::error::{invalid_arg, Result};
use crate::signal::Dim;

/// Detail coefficients of one level: one band in 1D, three in 2D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailLevel {
    pub j: usize,
    /// `[rows, cols]`; `rows == 1` in 1D.
    pub shape: [usize; 2],
    pub bands: Vec<Vec<f64>>,
    pub valid: Vec<bool>,
}

impl DetailLevel {
    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// Largest modulus across bands at a position.
    pub fn max_abs_at(&self, idx: usize) -> f64 {
        self.bands.iter().fold(0.0f64, |m, b| m.max(b[idx].abs()))
    }
}

/// Coarsest approximation band, kept in the orthonormal convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseBand {
    pub shape: [usize; 2],
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

/// Immutable multiresolution set of L1-normalized detail coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPyramid {
    dim: Dim,
    input_shape: [usize; 2],
    filter_order: usize,
    boundary: Boundary,
    levels: Vec<DetailLevel>,
    coarse: Option<CoarseBand>,
    integration_order: f64,
}

impl CoefficientPyramid {
    pub(crate) fn from_transform(
        dim: Dim,
        input_shape: [usize; 2],
        filter_order: usize,
        boundary: Boundary,
        levels: Vec<DetailLevel>,
        coarse: CoarseBand,
    ) -> Self {
        Self {
            dim,
            input_shape,
            filter_order,
            boundary,
            levels,
            coarse: Some(coarse),
            integration_order: 0.0,
        }
    }

    /// Reassembles a pyramid from stored parts; shapes are checked by
    /// `from_levels`.
    pub(crate) fn from_parts(
        dim: Dim,
        input_shape: [usize; 2],
        filter_order: usize,
        boundary: Boundary,
        levels: Vec<DetailLevel>,
        coarse: Option<CoarseBand>,
        integration_order: f64,
    ) -> Result<Self> {
        let checked = Self::from_levels(dim, levels)?;
        if let Some(c) = &coarse {
            if c.values.len() != c.shape[0] * c.shape[1] || c.valid.len() != c.values.len() {
                return invalid_arg("coarse band arrays do not match its shape");
            }
        }
        Ok(Self {
            input_shape,
            filter_order,
            boundary,
            coarse,
            integration_order,
            ..checked
        })
    }

    /// Builds a pyramid from explicit levels (finest first), e.g. for
    /// synthetic coefficient fields. Level `j` must hold `j = 1, 2, ...`
    /// and each level must halve the previous shape along analyzed axes.
    pub fn from_levels(dim: Dim, levels: Vec<DetailLevel>) -> Result<Self> {
        if levels.is_empty() {
            return invalid_arg("pyramid needs at least one level");
        }
        let bands = match dim {
            Dim::One => 1,
            Dim::Two => 3,
        };
        for (i, level) in levels.iter().enumerate() {
            if level.j != i + 1 {
                return invalid_arg(format!("level {} found at index {i}", level.j));
            }
            if dim == Dim::One && level.shape[0] != 1 {
                return invalid_arg("1D levels must have a single row");
            }
            if level.bands.len() != bands {
                return invalid_arg(format!(
                    "level {} has {} bands, expected {bands}",
                    level.j,
                    level.bands.len()
                ));
            }
            if level.bands.iter().any(|b| b.len() != level.len())
                || level.valid.len() != level.len()
            {
                return invalid_arg(format!("level {} arrays do not match its shape", level.j));
            }
            if i > 0 {
                let finer = &levels[i - 1];
                let rows_ok = dim == Dim::One || level.shape[0] == finer.shape[0] / 2;
                if !rows_ok || level.shape[1] != finer.shape[1] / 2 {
                    return invalid_arg(format!(
                        "level {} shape {:?} is not half of {:?}",
                        level.j, level.shape, finer.shape
                    ));
                }
            }
        }
        let first = &levels[0];
        let input_shape = match dim {
            Dim::One => [1, first.shape[1] * 2],
            Dim::Two => [first.shape[0] * 2, first.shape[1] * 2],
        };
        Ok(Self {
            dim,
            input_shape,
            filter_order: 0,
            boundary: Boundary::Periodic,
            levels,
            coarse: None,
            integration_order: 0.0,
        })
    }

    /// Same coefficients flagged with another border convention; used to
    /// mark hand-built pyramids as non-periodic.
    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn input_shape(&self) -> [usize; 2] {
        self.input_shape
    }

    /// Filter order used by the transform (0 for hand-built pyramids).
    pub fn filter_order(&self) -> usize {
        self.filter_order
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn levels(&self) -> &[DetailLevel] {
        &self.levels
    }

    pub fn level(&self, j: usize) -> Option<&DetailLevel> {
        j.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn coarse(&self) -> Option<&CoarseBand> {
        self.coarse.as_ref()
    }

    /// Accumulated pseudo-fractional integration order.
    pub fn integration_order(&self) -> f64 {
        self.integration_order
    }

    pub(crate) fn with_levels(&self, levels: Vec<DetailLevel>, integration_order: f64) -> Self {
        Self {
            levels,
            integration_order,
            ..self.clone()
        }
    }

    /// Valid coefficients of every level, bands pooled.
    pub fn atoms(&self) -> AtomLevels {
        let levels = self
            .levels
            .iter()
            .map(|level| {
                let cols = level.shape[1];
                let mut values = Vec::new();
                let mut coords = Vec::new();
                for band in &level.bands {
                    for (idx, (&v, &ok)) in band.iter().zip(&level.valid).enumerate() {
                        if ok {
                            values.push(v);
                            coords.push([idx / cols, idx % cols]);
                        }
                    }
                }
                AtomLevel {
                    j: level.j,
                    values,
                    coords,
                }
            })
            .collect();
        AtomLevels {
            dim: self.dim,
            levels,
        }
    }
}
