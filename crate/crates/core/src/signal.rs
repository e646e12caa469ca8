use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of spatial dimensions of the analyzed data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    One,
    Two,
}

impl Dim {
    pub fn d(self) -> usize {
        match self {
            Dim::One => 1,
            Dim::Two => 2,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.d() as f64
    }
}

/// Regularly sampled 1D signal or 2D image, stored row-major.
///
/// 1D signals are stored with `rows == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
    dim: Dim,
    spacing: f64,
}

impl Signal {
    pub fn new_1d(data: Vec<f64>) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::InvalidData(format!(
                "signal needs at least 2 samples, got {}",
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self {
            rows: 1,
            cols: data.len(),
            data,
            dim: Dim::One,
            spacing: 1.0,
        })
    }

    pub fn new_2d(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidData(format!(
                "image needs at least 2x2 pixels, got {rows}x{cols}"
            )));
        }
        if rows * cols != data.len() {
            return Err(Error::InvalidData(format!(
                "image shape {rows}x{cols} does not match {} samples",
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self {
            data,
            rows,
            cols,
            dim: Dim::Two,
            spacing: 1.0,
        })
    }

    pub fn with_spacing(mut self, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "sample spacing must be positive, got {spacing}"
            )));
        }
        self.spacing = spacing;
        Ok(self)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn samples(&self) -> &[f64] {
        &self.data
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.data
    }

    /// Same shape with every sample mapped through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Signal {
        Signal {
            data: self.data.iter().map(|x| f(*x)).collect(),
            ..*self
        }
    }

    /// Shortest axis length (the only axis for 1D signals).
    pub fn min_axis(&self) -> usize {
        match self.dim {
            Dim::One => self.cols,
            Dim::Two => self.rows.min(self.cols),
        }
    }

    /// Contiguous sub-range of a 1D signal.
    pub fn window(&self, start: usize, len: usize) -> Result<Signal> {
        if self.dim != Dim::One {
            return Err(Error::InvalidArgument(
                "windows are only defined for 1D signals".into(),
            ));
        }
        if start + len > self.cols {
            return Err(Error::InvalidArgument(format!(
                "window [{start}, {}) exceeds signal length {}",
                start + len,
                self.cols
            )));
        }
        Signal::new_1d(self.data[start..start + len].to_vec())
    }
}

fn check_finite(data: &[f64]) -> Result<()> {
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidData(format!(
            "non-finite sample {} at index {i}",
            data[i]
        )));
    }
    Ok(())
}
