//! Box-counting dimension of binary images, graph dimension from
//! oscillations, and a Von Koch snowflake rasterizer.

use serde::{Deserialize, Serialize};

use crate::dwt::{design_daubechies_filter, dwt_forward, Boundary};
use crate::error::{invalid_arg, Error, Result};
use crate::leaders::compute_leaders;
use crate::regression::RegressionConfig;
use crate::scaling::{
    fit_scaling_function, oscillation_atoms, structure_functions, structure_functions_from_atoms,
    Atoms, Source,
};
use crate::signal::Signal;

/// Square occupancy grid of side `2^resolution`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryGrid {
    resolution: usize,
    cells: Vec<bool>,
}

impl BinaryGrid {
    pub fn new(resolution: usize, cells: Vec<bool>) -> Result<Self> {
        if resolution == 0 || resolution > 15 {
            return invalid_arg(format!("resolution must be in 1..=15, got {resolution}"));
        }
        let side = 1usize << resolution;
        if cells.len() != side * side {
            return Err(Error::InvalidData(format!(
                "grid of side {side} needs {} cells, got {}",
                side * side,
                cells.len()
            )));
        }
        if !cells.iter().any(|c| *c) {
            return Err(Error::InvalidData("grid has no occupied cell".into()));
        }
        Ok(Self { resolution, cells })
    }

    pub fn from_fn(resolution: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let side = 1usize << resolution.min(15);
        let cells = (0..side * side).map(|i| f(i / side, i % side)).collect();
        Self::new(resolution, cells)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn side(&self) -> usize {
        1 << self.resolution
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.side() + col]
    }

    pub fn occupied(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }

    /// Indicator image (1 on occupied cells).
    pub fn to_signal(&self) -> Signal {
        let side = self.side();
        let data = self.cells.iter().map(|c| f64::from(u8::from(*c))).collect();
        Signal::new_2d(side, side, data).expect("grid side is at least 2")
    }

    /// Occupied boxes of side `2^j` cells, `j = 0..=resolution`.
    pub fn box_counts(&self) -> Vec<usize> {
        let mut side = self.side();
        let mut level = self.cells.clone();
        let mut counts = vec![self.occupied()];
        while side > 1 {
            let half = side / 2;
            let mut next = vec![false; half * half];
            for (i, cell) in next.iter_mut().enumerate() {
                let (r, c) = (2 * (i / half), 2 * (i % half));
                *cell = level[r * side + c]
                    || level[r * side + c + 1]
                    || level[(r + 1) * side + c]
                    || level[(r + 1) * side + c + 1];
            }
            counts.push(next.iter().filter(|c| **c).count());
            level = next;
            side = half;
        }
        counts
    }
}

/// Box-counting dimension: minus the slope of `log2 N` against `j`, `N`
/// the number of occupied boxes of side `2^j` cells. Only sizes with at
/// least two occupied boxes enter the fit.
pub fn box_dimension(grid: &BinaryGrid, config: &RegressionConfig) -> Result<f64> {
    config.validate()?;
    if grid.occupied() < 2 {
        return Err(Error::InsufficientData(
            "a single occupied cell has no box dimension".into(),
        ));
    }
    let points: Vec<(usize, f64, usize)> = grid
        .box_counts()
        .into_iter()
        .enumerate()
        .filter(|(_, n)| *n >= 2)
        .map(|(j, n)| (j, (n as f64).log2(), n))
        .collect();
    let fit = config.with_min_atoms(2).fit(&points).map_err(|e| match e {
        Error::InsufficientScales { .. } => Error::InsufficientData(
            "fewer than 3 box sizes with at least 2 occupied boxes in range".into(),
        ),
        other => other,
    })?;
    Ok(-fit.slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fill {
    Boundary,
    Filled,
}

/// Closed polyline of the depth-`depth` snowflake iterate, `3 * 4^depth`
/// vertices (the closing segment is implicit), in the unit square.
pub fn von_koch_polyline(depth: usize) -> Vec<[f64; 2]> {
    let side = 0.8;
    let height = side * 3f64.sqrt() / 2.0;
    // The snowflake spans 4/3 of the triangle height; centre it vertically.
    let top = 0.5 - (4.0 / 3.0 * height) / 2.0 + height / 3.0;
    // Counter-clockwise in (x, y) with y pointing down, so bumps go outward.
    let mut pts = vec![
        [0.5 - side / 2.0, top],
        [0.5 + side / 2.0, top],
        [0.5, top + height],
    ];
    let (c, s) = (0.5, -(3f64.sqrt()) / 2.0);
    for _ in 0..depth {
        let mut next = Vec::with_capacity(pts.len() * 4);
        for i in 0..pts.len() {
            let a = pts[i];
            let b = pts[(i + 1) % pts.len()];
            let d = [(b[0] - a[0]) / 3.0, (b[1] - a[1]) / 3.0];
            let p1 = [a[0] + d[0], a[1] + d[1]];
            let peak = [p1[0] + c * d[0] - s * d[1], p1[1] + s * d[0] + c * d[1]];
            let p2 = [a[0] + 2.0 * d[0], a[1] + 2.0 * d[1]];
            next.extend([a, p1, peak, p2]);
        }
        pts = next;
    }
    pts
}

/// Raster of the Von Koch snowflake on a `2^resolution` grid: the cells
/// crossed by the curve, plus the interior in filled mode.
pub fn rasterize_von_koch(depth: usize, resolution: usize, fill: Fill) -> Result<BinaryGrid> {
    if resolution < 2 || depth > resolution - 2 {
        return invalid_arg(format!(
            "depth {depth} is too deep for resolution {resolution} (at most resolution - 2)"
        ));
    }
    let side = 1usize << resolution;
    let scale = side as f64;
    let pts: Vec<[f64; 2]> = von_koch_polyline(depth)
        .into_iter()
        .map(|[x, y]| [x * scale, y * scale])
        .collect();
    let mut cells = vec![false; side * side];
    let mut mark = |x: f64, y: f64| {
        let (c, r) = (x.floor(), y.floor());
        if c >= 0.0 && r >= 0.0 && (c as usize) < side && (r as usize) < side {
            cells[r as usize * side + c as usize] = true;
        }
    };
    for i in 0..pts.len() {
        let a = pts[i];
        let b = pts[(i + 1) % pts.len()];
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let steps = (len * 4.0).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            mark(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]));
        }
    }
    if fill == Fill::Filled {
        // Even-odd scanline fill at cell centres.
        for r in 0..side {
            let y = r as f64 + 0.5;
            let mut xs: Vec<f64> = (0..pts.len())
                .filter_map(|i| {
                    let a = pts[i];
                    let b = pts[(i + 1) % pts.len()];
                    ((a[1] <= y) != (b[1] <= y))
                        .then(|| a[0] + (y - a[1]) / (b[1] - a[1]) * (b[0] - a[0]))
                })
                .collect();
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                let c0 = (pair[0] - 0.5).ceil().max(0.0) as usize;
                let c1 = ((pair[1] - 0.5).floor() as usize).min(side - 1);
                for c in c0..=c1 {
                    cells[r * side + c] = true;
                }
            }
        }
    }
    BinaryGrid::new(resolution, cells)
}

/// Graph dimension estimates of a signal or image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphDimension {
    /// `max(d, d + 1 - O(1))`.
    pub dimension: f64,
    /// Oscillation exponent `O(1)`, second order when `second_order`.
    pub o1: f64,
    pub second_order: bool,
    /// `max(d, d + 1 - zeta(1))` from wavelet leaders, when computable.
    pub leader_dimension: Option<f64>,
    /// Constant input: the dimension is `d` by convention.
    pub degenerate: bool,
}

/// Wavelet used for the leader variant.
const LEADER_FILTER_ORDER: usize = 3;

/// Box dimension of the graph from the oscillation scaling function at
/// `p = 1`. When `O(1) >= 1` on a 1D signal the second-order oscillation is
/// tried and reported as `o1` if it gives a larger exponent.
pub fn graph_dimension_from_oscillation(
    signal: &Signal,
    config: &RegressionConfig,
) -> Result<GraphDimension> {
    config.validate()?;
    let d = signal.dim().as_f64();
    let x = signal.samples();
    if x.iter().all(|v| *v == x[0]) {
        log::warn!("constant signal: graph dimension set to d");
        return Ok(GraphDimension {
            dimension: d,
            o1: f64::INFINITY,
            second_order: false,
            leader_dimension: Some(d),
            degenerate: true,
        });
    }
    let o1_of = |second: bool| -> Result<f64> {
        let atoms = oscillation_atoms(signal, second, config.j2)?;
        let table = structure_functions_from_atoms(Source::Oscillations, &atoms, &[1.0], 0)?;
        let est = fit_scaling_function(&table, config)?;
        Ok(est.oscillation.expect("oscillation table")[0])
    };
    let first = o1_of(false)?;
    // Past O(1) = 1 the first-order oscillation saturates; the second
    // order can resolve the exponent but the dimension is d either way.
    let second = (first >= 1.0 && signal.dim() == crate::signal::Dim::One)
        .then(|| o1_of(true).ok())
        .flatten()
        .filter(|o2| *o2 > first);
    let leader_dimension = leader_zeta1(signal, config)
        .ok()
        .map(|z| d.max(d + 1.0 - z));
    Ok(GraphDimension {
        dimension: d.max(d + 1.0 - first),
        o1: second.unwrap_or(first),
        second_order: second.is_some(),
        leader_dimension,
        degenerate: false,
    })
}

fn leader_zeta1(signal: &Signal, config: &RegressionConfig) -> Result<f64> {
    let filter = design_daubechies_filter(LEADER_FILTER_ORDER)?;
    let pyramid = dwt_forward(signal, &filter, config.j2, Boundary::Discard)?;
    let leaders = compute_leaders(&pyramid)?;
    let table = structure_functions(Atoms::Leaders(&leaders), &[1.0], 0)?;
    Ok(fit_scaling_function(&table, config)?
        .zeta
        .expect("leader table")[0])
}
