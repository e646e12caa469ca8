//! Flattened per-level views of the quantities entering scaling statistics.

use crate::signal::Dim;

/// Valid atoms of one level with their positions at that level.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomLevel {
    pub j: usize,
    pub values: Vec<f64>,
    /// `[row, col]` index at level `j` (row is 0 in 1D).
    pub coords: Vec<[usize; 2]>,
}

impl AtomLevel {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Atoms of every level, finest first.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomLevels {
    pub dim: Dim,
    pub levels: Vec<AtomLevel>,
}

impl AtomLevels {
    pub fn level(&self, j: usize) -> Option<&AtomLevel> {
        self.levels.iter().find(|l| l.j == j)
    }
}
