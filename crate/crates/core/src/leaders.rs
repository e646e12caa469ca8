//! Wavelet leaders: suprema of coefficient moduli over the 3-fold enlarged
//! cube and all finer scales.

use serde::{Deserialize, Serialize};

use crate::atoms::{AtomLevel, AtomLevels};
use crate::dwt::{Boundary, CoefficientPyramid};
use crate::error::{invalid_arg, Error, Result};
use crate::regression::weighted_slope;
use crate::signal::Dim;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderLevel {
    pub j: usize,
    pub shape: [usize; 2],
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

impl LeaderLevel {
    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderPyramid {
    dim: Dim,
    input_shape: [usize; 2],
    boundary: Boundary,
    integration_order: f64,
    levels: Vec<LeaderLevel>,
}

impl LeaderPyramid {
    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn input_shape(&self) -> [usize; 2] {
        self.input_shape
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Integration order of the coefficient pyramid the leaders came from.
    pub fn integration_order(&self) -> f64 {
        self.integration_order
    }

    pub fn levels(&self) -> &[LeaderLevel] {
        &self.levels
    }

    pub fn level(&self, j: usize) -> Option<&LeaderLevel> {
        j.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    pub fn atoms(&self) -> AtomLevels {
        let levels = self
            .levels
            .iter()
            .map(|level| {
                let cols = level.shape[1];
                let (values, coords) = level
                    .values
                    .iter()
                    .zip(&level.valid)
                    .enumerate()
                    .filter(|(_, (_, ok))| **ok)
                    .map(|(idx, (v, _))| (*v, [idx / cols, idx % cols]))
                    .unzip();
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

/// Computes `d_λ = sup_{λ' ⊂ 3λ} |c_λ'|` for every cube of every level.
///
/// Per-cube suprema over all finer scales (and all bands in 2D) are
/// accumulated bottom-up, then maximized over the `3^d` same-scale
/// neighbourhood. Neighbours wrap around for periodic pyramids and are
/// treated as masked otherwise; a leader touching any masked coefficient
/// is masked.
pub fn compute_leaders(pyramid: &CoefficientPyramid) -> Result<LeaderPyramid> {
    if pyramid.num_levels() < 2 {
        return invalid_arg("leaders need a pyramid with at least 2 levels");
    }
    let dim = pyramid.dim();
    let wrap = pyramid.boundary() == Boundary::Periodic;
    let mut levels = Vec::with_capacity(pyramid.num_levels());
    let mut finer: Option<(Vec<f64>, Vec<bool>, [usize; 2])> = None;

    for level in pyramid.levels() {
        let [rows, cols] = level.shape;
        let mut sup = vec![0.0; rows * cols];
        let mut sup_ok = vec![false; rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                let idx = r * cols + c;
                let mut m = level.max_abs_at(idx);
                let mut ok = level.valid[idx];
                if let Some((fsup, fok, [frows, fcols])) = &finer {
                    let child_rows: &[usize] = match dim {
                        Dim::One => &[0],
                        Dim::Two => &[2 * r, 2 * r + 1],
                    };
                    for &cr in child_rows {
                        for cc in [2 * c, 2 * c + 1] {
                            debug_assert!(cr < *frows && cc < *fcols);
                            let cidx = cr * fcols + cc;
                            m = m.max(fsup[cidx]);
                            ok &= fok[cidx];
                        }
                    }
                }
                sup[idx] = m;
                sup_ok[idx] = ok;
            }
        }

        let mut values = vec![0.0; rows * cols];
        let mut valid = vec![false; rows * cols];
        let row_offsets: &[isize] = match dim {
            Dim::One => &[0],
            Dim::Two => &[-1, 0, 1],
        };
        for r in 0..rows {
            for c in 0..cols {
                let mut m = 0.0f64;
                let mut ok = true;
                for &dr in row_offsets {
                    for dc in [-1isize, 0, 1] {
                        match neighbour(r, dr, rows, wrap).zip(neighbour(c, dc, cols, wrap)) {
                            Some((nr, nc)) => {
                                let nidx = nr * cols + nc;
                                m = m.max(sup[nidx]);
                                ok &= sup_ok[nidx];
                            }
                            None => ok = false,
                        }
                    }
                }
                values[r * cols + c] = m;
                valid[r * cols + c] = ok;
            }
        }
        levels.push(LeaderLevel {
            j: level.j,
            shape: level.shape,
            values,
            valid,
        });
        finer = Some((sup, sup_ok, level.shape));
    }

    Ok(LeaderPyramid {
        dim,
        input_shape: pyramid.input_shape(),
        boundary: pyramid.boundary(),
        integration_order: pyramid.integration_order(),
        levels,
    })
}

fn neighbour(i: usize, delta: isize, len: usize, wrap: bool) -> Option<usize> {
    let t = i as isize + delta;
    if wrap {
        Some(t.rem_euclid(len as isize) as usize)
    } else if (0..len as isize).contains(&t) {
        Some(t as usize)
    } else {
        None
    }
}

/// Least-squares slope of `log2 d_{λ_j(x0)}` against `j` over
/// `j_range = (j1, j2)` inclusive.
///
/// The slope estimates the pointwise Hölder exponent at `x0`, given in
/// normalized coordinates `[0,1)^d` (`x0[0]` is the row coordinate in 2D
/// and is ignored in 1D). A finite range of scales cannot separate the
/// liminf from a plain limit, so this is a regression estimate.
pub fn pointwise_holder_estimate(
    leaders: &LeaderPyramid,
    x0: [f64; 2],
    j_range: (usize, usize),
) -> Result<f64> {
    let (j1, j2) = j_range;
    if j1 >= j2 || j1 == 0 || j2 > leaders.levels.len() {
        return invalid_arg(format!(
            "scale range ({j1}, {j2}) not within 1..={} with j1 < j2",
            leaders.levels.len()
        ));
    }
    let coords: &[f64] = match leaders.dim {
        Dim::One => &x0[1..],
        Dim::Two => &x0[..],
    };
    if coords.iter().any(|x| !(0.0..1.0).contains(x)) {
        return invalid_arg(format!("x0 = {x0:?} outside [0, 1)^d"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in j1..=j2 {
        let level = &leaders.levels[j - 1];
        let [rows, cols] = level.shape;
        let locate = |x: f64, len: usize, input: usize| -> usize {
            let k = (x * input as f64 / 2f64.powi(j as i32)).floor() as usize;
            k.min(len - 1)
        };
        let c = locate(x0[1], cols, leaders.input_shape[1]);
        let r = match leaders.dim {
            Dim::One => 0,
            Dim::Two => locate(x0[0], rows, leaders.input_shape[0]),
        };
        let idx = r * cols + c;
        let d = level.values[idx];
        if !level.valid[idx] || d <= 0.0 {
            return Err(Error::DegenerateLeader { level: j });
        }
        xs.push(j as f64);
        ys.push(d.log2());
    }
    Ok(weighted_slope(&xs, &ys, None).slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dwt::{design_daubechies_filter, dwt_forward, DetailLevel};
    use crate::signal::Signal;
    use proptest::prelude::*;

    fn pyramid_1d(levels: Vec<Vec<f64>>) -> CoefficientPyramid {
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

    /// Exhaustive enumeration of every finer-or-equal cube inside the
    /// 3-fold neighbourhood, following the dyadic containment definition.
    fn exhaustive_leader(p: &CoefficientPyramid, j: usize, r: usize, c: usize) -> (f64, bool) {
        let dim = p.dim();
        let level = p.level(j).unwrap();
        let [rows, cols] = level.shape;
        let wrap = p.boundary() == Boundary::Periodic;
        let row_offsets: Vec<isize> = if dim == Dim::Two {
            vec![-1, 0, 1]
        } else {
            vec![0]
        };
        let mut m = 0.0f64;
        let mut ok = true;
        for dr in &row_offsets {
            for dc in [-1isize, 0, 1] {
                let (Some(nr), Some(nc)) =
                    (neighbour(r, *dr, rows, wrap), neighbour(c, dc, cols, wrap))
                else {
                    ok = false;
                    continue;
                };
                for jf in 1..=j {
                    let span = 1usize << (j - jf);
                    let fl = p.level(jf).unwrap();
                    let fcols = fl.shape[1];
                    let rspan = if dim == Dim::Two {
                        nr * span..(nr + 1) * span
                    } else {
                        0..1
                    };
                    for fr in rspan {
                        for fc in nc * span..(nc + 1) * span {
                            let idx = fr * fcols + fc;
                            m = m.max(fl.max_abs_at(idx));
                            ok &= fl.valid[idx];
                        }
                    }
                }
            }
        }
        (m, ok)
    }

    fn assert_matches_exhaustive(p: &CoefficientPyramid) -> std::result::Result<(), TestCaseError> {
        let l = compute_leaders(p).unwrap();
        for level in l.levels() {
            let [rows, cols] = level.shape;
            for r in 0..rows {
                for c in 0..cols {
                    let (m, ok) = exhaustive_leader(p, level.j, r, c);
                    let idx = r * cols + c;
                    prop_assert_eq!(level.valid[idx], ok);
                    if ok {
                        prop_assert_eq!(level.values[idx], m);
                    }
                }
            }
        }
        Ok(())
    }

    #[test]
    fn zero_pyramid_has_zero_leaders() {
        let p = pyramid_1d(vec![vec![0.0; 16], vec![0.0; 8], vec![0.0; 4]]);
        let l = compute_leaders(&p).unwrap();
        assert!(l
            .levels()
            .iter()
            .all(|lv| lv.values.iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn two_level_example_picks_up_child() {
        let p = pyramid_1d(vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0]]);
        let l = compute_leaders(&p).unwrap();
        assert_eq!(l.levels()[1].values[0], 1.0);
        let (m, ok) = exhaustive_leader(&p, 2, 0, 0);
        assert!(ok);
        assert_eq!(m, 1.0);
    }

    #[test]
    fn single_level_pyramid_is_rejected() {
        let p = pyramid_1d(vec![vec![1.0, 2.0]]);
        assert!(matches!(
            compute_leaders(&p),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn discard_pyramid_masks_border_leaders() {
        let f = design_daubechies_filter(2).unwrap();
        let x: Vec<f64> = (0..256).map(|i| ((i as f64) * 0.1).sin()).collect();
        let p = dwt_forward(&Signal::new_1d(x).unwrap(), &f, 5, Boundary::Discard).unwrap();
        let l = compute_leaders(&p).unwrap();
        for level in l.levels() {
            assert!(!level.valid[0]);
            assert!(!level.valid[level.values.len() - 1]);
            for r in 0..level.shape[0] {
                for c in 0..level.shape[1] {
                    let (m, ok) = exhaustive_leader(&p, level.j, r, c);
                    let idx = r * level.shape[1] + c;
                    assert_eq!(level.valid[idx], ok);
                    if ok {
                        assert_eq!(level.values[idx], m);
                    }
                }
            }
        }
    }

    #[test]
    fn exact_power_law_gives_exact_exponent() {
        let levels: Vec<Vec<f64>> = (1..=8)
            .map(|j| vec![2f64.powf(0.7 * j as f64); 256 >> j])
            .collect();
        let l = compute_leaders(&pyramid_1d(levels)).unwrap();
        let h = pointwise_holder_estimate(&l, [0.0, 0.3], (1, 8)).unwrap();
        assert!((h - 0.7).abs() < 1e-12);
    }

    #[test]
    fn zero_leader_on_path_is_degenerate() {
        let mut levels: Vec<Vec<f64>> = (1..=4).map(|j| vec![1.0; 64 >> j]).collect();
        levels[0] = vec![0.0; 32];
        levels[1] = vec![0.0; 16];
        let l = compute_leaders(&pyramid_1d(levels)).unwrap();
        let err = pointwise_holder_estimate(&l, [0.0, 0.5], (1, 4)).unwrap_err();
        assert_eq!(err, Error::DegenerateLeader { level: 1 });
        assert!(pointwise_holder_estimate(&l, [0.0, 1.5], (1, 4)).is_err());
    }

    #[test]
    fn cusp_exponent_is_recovered() {
        // Sampling dominates the finest levels, so fit over coarse ones.
        let n = 1usize << 16;
        let x0 = 0.5;
        let x: Vec<f64> = (0..n)
            .map(|i| (i as f64 / n as f64 - x0).abs().sqrt())
            .collect();
        let f = design_daubechies_filter(3).unwrap();
        let p = dwt_forward(&Signal::new_1d(x).unwrap(), &f, 13, Boundary::Discard).unwrap();
        let l = compute_leaders(&p).unwrap();
        let h = pointwise_holder_estimate(&l, [0.0, x0], (8, 13)).unwrap();
        assert!((h - 0.5).abs() < 0.1, "cusp estimate {h}");
    }

    #[test]
    fn haar_leaders_bounded_by_half_oscillation() {
        // With the Haar wavelet the support of c_{j,k} is exactly the
        // dyadic interval, so |c| <= Os/2 over it and d <= Os(3λ)/2.
        let n = 1usize << 10;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                (7.0 * t).sin() + (t - 0.3).abs().powf(0.6) + 0.2 * (53.0 * t).cos()
            })
            .collect();
        let f = design_daubechies_filter(1).unwrap();
        let p = dwt_forward(
            &Signal::new_1d(x.clone()).unwrap(),
            &f,
            8,
            Boundary::Discard,
        )
        .unwrap();
        let l = compute_leaders(&p).unwrap();
        for level in l.levels() {
            let w = 1usize << level.j;
            for (k, (d, ok)) in level.values.iter().zip(&level.valid).enumerate() {
                if !ok {
                    continue;
                }
                let lo = (k - 1) * w;
                let hi = ((k + 2) * w).min(n);
                let span = &x[lo..hi];
                let os = span.iter().cloned().fold(f64::MIN, f64::max)
                    - span.iter().cloned().fold(f64::MAX, f64::min);
                assert!(
                    *d <= 0.5 * os + 1e-12,
                    "j={} k={k}: {d} > {}",
                    level.j,
                    os / 2.0
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn recursive_equals_exhaustive_1d(
            log_leaves in 2u32..=6,
            raw in prop::collection::vec(-4.0f64..4.0, 128),
            mask in prop::collection::vec(prop::bool::weighted(0.95), 128),
            periodic in any::<bool>(),
        ) {
            let leaves = 1usize << log_leaves;
            let mut offset = 0;
            let mut levels = Vec::new();
            let mut len = leaves;
            let mut j = 1;
            while len >= 1 && j <= log_leaves as usize {
                let v = raw[offset..offset + len].to_vec();
                let ok = if periodic { vec![true; len] } else { mask[offset..offset + len].to_vec() };
                levels.push(DetailLevel { j, shape: [1, len], bands: vec![v], valid: ok });
                offset += len;
                len /= 2;
                j += 1;
            }
            prop_assume!(levels.len() >= 2);
            let p = CoefficientPyramid::from_levels(Dim::One, levels).unwrap();
            let p = if periodic { p } else { p.with_boundary(Boundary::Discard) };
            assert_matches_exhaustive(&p)?;
        }

        #[test]
        fn recursive_equals_exhaustive_2d(
            raw in prop::collection::vec(-4.0f64..4.0, 3 * 84),
            periodic in any::<bool>(),
        ) {
            // 8x8 leaves, three levels, three bands.
            let mut offset = 0;
            let mut levels = Vec::new();
            for (j, side) in [(1usize, 8usize), (2, 4), (3, 2)] {
                let len = side * side;
                let bands = (0..3).map(|b| raw[offset + b * len..offset + (b + 1) * len].to_vec()).collect();
                offset += 3 * len;
                levels.push(DetailLevel { j, shape: [side, side], bands, valid: vec![true; len] });
            }
            let p = CoefficientPyramid::from_levels(Dim::Two, levels).unwrap();
            let p = if periodic { p } else { p.with_boundary(Boundary::Discard) };
            assert_matches_exhaustive(&p)?;
        }

        #[test]
        fn nesting_and_sign_invariance(
            raw in prop::collection::vec(-4.0f64..4.0, 126),
            signs in prop::collection::vec(any::<bool>(), 126),
        ) {
            let mut offset = 0;
            let mut levels = Vec::new();
            let mut flipped = Vec::new();
            for j in 1..=6usize {
                let len = 64 >> (j - 1);
                let v = raw[offset..offset + len].to_vec();
                let w: Vec<f64> = v.iter().zip(&signs[offset..offset + len]).map(|(x, s)| if *s { -x } else { *x }).collect();
                levels.push(DetailLevel { j, shape: [1, len], bands: vec![v], valid: vec![true; len] });
                flipped.push(DetailLevel { j, shape: [1, len], bands: vec![w], valid: vec![true; len] });
                offset += len;
            }
            let a = compute_leaders(&CoefficientPyramid::from_levels(Dim::One, levels).unwrap()).unwrap();
            let b = compute_leaders(&CoefficientPyramid::from_levels(Dim::One, flipped).unwrap()).unwrap();
            prop_assert_eq!(&a, &b);
            for pair in a.levels().windows(2) {
                let (fine, coarse) = (&pair[0], &pair[1]);
                for k in 0..coarse.values.len() {
                    let children = fine.values[2 * k].max(fine.values[2 * k + 1]);
                    prop_assert!(coarse.values[k] >= children);
                }
            }
        }
    }
}
