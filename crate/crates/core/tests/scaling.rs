mod common;

use common::{dyadic_from_raw, pyramid_1d};
use mfleaders::fracint::pseudo_fractional_integrate;
use mfleaders::leaders::compute_leaders;
use mfleaders::regression::{RegressionConfig, Weighting};
use mfleaders::scaling::{
    estimate_hmin, estimate_log_cumulants, fit_scaling_function, infer_subordination_h,
    legendre_transform, linear_grid, membership_tests, structure_functions, Atoms,
    EstimateIntervals, Interval, ScalingEstimate, Verdict,
};
use mfleaders::{Dim, Error};
use proptest::prelude::*;

fn power_law_pyramid(h: f64, leaves: usize, levels: usize) -> mfleaders::dwt::CoefficientPyramid {
    // Alternating signs do not change moduli.
    pyramid_1d(
        (1..=levels)
            .map(|j| {
                (0..leaves >> (j - 1))
                    .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * (h * j as f64).exp2())
                    .collect()
            })
            .collect(),
    )
}

#[test]
fn exact_power_law_structure_functions() {
    let p = power_law_pyramid(0.7, 512, 7);
    let grid = [0.5, 1.0, 2.0, 3.0];
    let table = structure_functions(Atoms::Coefficients(&p), &grid, 2).unwrap();
    for level in &table.levels {
        for (i, q) in grid.iter().enumerate() {
            let expect = q * 0.7 * level.j as f64;
            assert!((level.log2_moments[i] - expect).abs() < 1e-12);
        }
    }
    let cfg = RegressionConfig::new(1, 7).unwrap();
    let est = fit_scaling_function(&table, &cfg).unwrap();
    for (q, e) in grid.iter().zip(est.eta.unwrap()) {
        assert!((e - 0.7 * q).abs() < 1e-12);
    }
}

#[test]
fn negative_p_rejected_for_coefficients() {
    let p = power_law_pyramid(0.5, 64, 4);
    let err = structure_functions(Atoms::Coefficients(&p), &[-1.0, 1.0], 1).unwrap_err();
    assert!(matches!(err, Error::InvalidArgument(_)));
    let l = compute_leaders(&p).unwrap();
    assert!(structure_functions(Atoms::Leaders(&l), &[-1.0, 1.0], 1).is_ok());
}

#[test]
fn leader_table_matches_direct_summation() {
    let raw: Vec<f64> = (0..126)
        .map(|i| ((i as f64 * 0.37).sin() * 3.0 + 0.1 * i as f64).abs() + 0.01)
        .collect();
    let p = dyadic_from_raw(&raw, 64, 6);
    let l = compute_leaders(&p).unwrap();
    let grid = [-2.0, -1.0, 0.5, 1.0, 2.0];
    let table = structure_functions(Atoms::Leaders(&l), &grid, 3).unwrap();
    assert_eq!(table.levels.len(), 6);
    for (level, stats) in l.levels().iter().zip(&table.levels) {
        let vals: Vec<f64> = level.values.clone();
        for (i, q) in grid.iter().enumerate() {
            let direct = (vals.iter().map(|v| v.powf(*q)).sum::<f64>() / vals.len() as f64).log2();
            assert!(
                (stats.log2_moments[i] - direct).abs() < 1e-12,
                "j={} p={q}",
                stats.j
            );
        }
    }
}

#[test]
fn exact_line_table_gives_exact_exponents() {
    let p = pyramid_1d(
        (1..=6)
            .map(|j| vec![(0.4 * j as f64 + 0.3).exp2(); 128 >> j])
            .collect(),
    );
    let l = compute_leaders(&p).unwrap();
    let grid = linear_grid(-3.0, 3.0, 13);
    let table = structure_functions(Atoms::Leaders(&l), &grid, 1).unwrap();
    for w in [Weighting::Uniform, Weighting::ByCount] {
        let cfg = RegressionConfig::new(1, 6)
            .unwrap()
            .with_weighting(w)
            .with_min_atoms(1);
        let est = fit_scaling_function(&table, &cfg).unwrap();
        for (q, z) in grid.iter().zip(est.zeta.unwrap()) {
            assert!((z - 0.4 * q).abs() < 1e-12);
        }
    }
}

#[test]
fn too_few_levels_is_insufficient_scales() {
    let p = power_law_pyramid(0.5, 64, 4);
    let table = structure_functions(Atoms::Coefficients(&p), &[1.0], 1).unwrap();
    let cfg = RegressionConfig::new(3, 6).unwrap();
    assert!(matches!(
        fit_scaling_function(&table, &cfg),
        Err(Error::InsufficientScales { .. })
    ));
}

#[test]
fn hmin_of_exact_sup_law() {
    let p = pyramid_1d(
        (1..=6)
            .map(|j| {
                let mut v = vec![0.1; 128 >> j];
                v[1] = -(0.3 * j as f64).exp2();
                v
            })
            .collect(),
    );
    let cfg = RegressionConfig::new(1, 6).unwrap();
    assert!((estimate_hmin(&p, &cfg).unwrap() - 0.3).abs() < 1e-12);
    let zero = pyramid_1d((1..=4).map(|j| vec![0.0; 64 >> j]).collect());
    assert!(matches!(
        estimate_hmin(&zero, &RegressionConfig::new(1, 4).unwrap()),
        Err(Error::Degenerate(_))
    ));
}

#[test]
fn deterministic_log_leaders_give_exact_cumulants() {
    let p = pyramid_1d(
        (1..=7)
            .map(|j| vec![(0.7 * j as f64).exp2(); 256 >> j])
            .collect(),
    );
    let l = compute_leaders(&p).unwrap();
    let c = estimate_log_cumulants(&l, 3, &RegressionConfig::new(1, 7).unwrap()).unwrap();
    assert!((c.c[0] - 0.7).abs() < 1e-12);
    assert!(c.c[1].abs() < 1e-12);
    assert!(c.c[2].abs() < 1e-12);
    assert!(estimate_log_cumulants(&l, 5, &RegressionConfig::new(1, 7).unwrap()).is_err());
}

#[test]
fn legendre_of_a_line_is_a_point() {
    let grid = linear_grid(-4.0, 4.0, 17);
    let zeta: Vec<f64> = grid.iter().map(|p| 0.7 * p).collect();
    let h = linear_grid(0.3, 1.1, 9);
    let s = legendre_transform(&grid, &zeta, 1.0, &h).unwrap();
    for (hh, l) in s.h.iter().zip(&s.l) {
        let expect = 1.0 - (hh - 0.7).abs() * 4.0;
        assert!((l - expect).abs() < 1e-12, "h={hh}: {l} vs {expect}");
    }
    assert!((s.argmax_h() - 0.7).abs() < 1e-12);
}

#[test]
fn legendre_of_a_parabola_matches_closed_form() {
    let (c1, c2) = (0.72, -0.08);
    let dp = 0.05;
    let grid = linear_grid(-8.0, 8.0, 321);
    let zeta: Vec<f64> = grid.iter().map(|p| c1 * p + c2 * p * p / 2.0).collect();
    // Inside the range where the minimizer stays on the grid.
    let h = linear_grid(c1 - 0.5, c1 + 0.5, 51);
    let s = legendre_transform(&grid, &zeta, 1.0, &h).unwrap();
    for (hh, l) in s.h.iter().zip(&s.l) {
        let closed = 1.0 + (hh - c1).powi(2) / (2.0 * c2);
        assert!(*l >= closed - 1e-12);
        assert!(l - closed <= c2.abs() * dp * dp / 8.0 + 1e-12, "h={hh}");
    }
    assert!((s.argmax_h() - c1).abs() <= 0.02);
}

#[test]
fn positive_only_grid_warns() {
    let s = legendre_transform(&[0.0, 1.0, 2.0], &[0.0, 0.5, 1.0], 1.0, &[0.5]).unwrap();
    assert_eq!(s.warnings.len(), 1);
    assert_eq!(s.h_support.1, None);
}

fn estimate_with(
    eta: [f64; 2],
    zeta2: f64,
    h_min: f64,
    half_width: Option<f64>,
) -> ScalingEstimate {
    let mut est = ScalingEstimate::empty(Dim::One, vec![1.0, 2.0]);
    est.eta = Some(eta.to_vec());
    est.zeta = Some(vec![0.5, zeta2]);
    est.h_min = Some(h_min);
    if let Some(w) = half_width {
        let iv = |x: f64| Interval {
            lo: x - w,
            hi: x + w,
            level: 0.9,
            resamples: 199,
        };
        est.intervals = Some(EstimateIntervals {
            eta: Some(eta.iter().map(|x| iv(*x)).collect()),
            zeta: Some(vec![iv(0.5), iv(zeta2)]),
            h_min: Some(iv(h_min)),
            cumulants: None,
        });
    }
    est
}

#[test]
fn membership_thresholds() {
    let r = membership_tests(&estimate_with([1.3, 2.0], 0.9, 0.4, Some(0.05))).unwrap();
    assert_eq!(r.in_bv, Verdict::Yes);
    assert_eq!(r.in_l2, Verdict::Yes);
    assert_eq!(r.locally_bounded, Verdict::Yes);
    assert_eq!(r.bounded_quadratic_variation, Verdict::No);

    let r = membership_tests(&estimate_with([1.02, 0.5], 1.5, -0.2, Some(0.05))).unwrap();
    assert_eq!(r.in_bv, Verdict::Inconclusive);
    assert_eq!(r.locally_bounded, Verdict::No);
    assert_eq!(r.bounded_quadratic_variation, Verdict::Inconclusive);

    let r = membership_tests(&estimate_with([0.74, 0.5], 1.2, 0.3, None)).unwrap();
    assert_eq!(r.in_bv, Verdict::No);
    assert_eq!(r.bounded_quadratic_variation, Verdict::Yes);

    let mut missing = estimate_with([1.3, 2.0], 0.9, 0.4, None);
    missing.h_min = None;
    assert!(matches!(
        membership_tests(&missing),
        Err(Error::IncompleteReport(_))
    ));
}

#[test]
fn subordination_root() {
    let grid = linear_grid(0.0, 4.0, 9);
    let mut est = ScalingEstimate::empty(Dim::One, grid.clone());
    est.eta = Some(grid.iter().map(|p| 0.5 * p).collect());
    let s = infer_subordination_h(&est).unwrap();
    assert!((s.h - 0.5).abs() < 1e-6);

    est.eta = Some(grid.iter().map(|p| 0.6 * p + 0.05).collect());
    let s = infer_subordination_h(&est).unwrap();
    assert!((s.p_root - 0.95 / 0.6).abs() < 1e-6);
    assert!(s.bracket_width < 1e-5);

    est.eta = Some(grid.iter().map(|p| 0.1 * p).collect());
    assert!(matches!(infer_subordination_h(&est), Err(Error::NoRoot(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn integration_shifts_exponents_exactly(
        raw in prop::collection::vec(0.01f64..5.0, 254),
        s in -1.0f64..1.5,
        j1 in 1usize..3,
        uniform in any::<bool>(),
    ) {
        let p = dyadic_from_raw(&raw, 128, 7);
        let grid = [0.0, 0.5, 1.0, 2.0, 3.5];
        let w = if uniform { Weighting::Uniform } else { Weighting::ByCount };
        let cfg = RegressionConfig::new(j1, 7).unwrap().with_weighting(w).with_min_atoms(1);
        let eta = |p: &mfleaders::dwt::CoefficientPyramid| {
            let t = structure_functions(Atoms::Coefficients(p), &grid, 1).unwrap();
            fit_scaling_function(&t, &cfg).unwrap().eta.unwrap()
        };
        let q = pseudo_fractional_integrate(&p, s).unwrap();
        let (a, b) = (eta(&p), eta(&q));
        prop_assert_eq!(a[0], 0.0);
        prop_assert_eq!(b[0], 0.0);
        for ((x, y), pp) in a.iter().zip(&b).zip(grid) {
            prop_assert!((y - x - s * pp).abs() < 1e-10);
        }
        let dh = estimate_hmin(&q, &cfg).unwrap() - estimate_hmin(&p, &cfg).unwrap();
        prop_assert!((dh - s).abs() < 1e-10);
        prop_assert_eq!(q.integration_order(), s);

        let l = compute_leaders(&p).unwrap();
        let t = structure_functions(Atoms::Leaders(&l), &[-1.0, 0.0, 1.0], 1).unwrap();
        prop_assert_eq!(fit_scaling_function(&t, &cfg).unwrap().zeta.unwrap()[1], 0.0);
    }

    #[test]
    fn integration_composes(
        raw in prop::collection::vec(-5.0f64..5.0, 126),
        s1 in -1.0f64..1.0,
        s2 in -1.0f64..1.0,
    ) {
        let p = dyadic_from_raw(&raw, 64, 6);
        let two = pseudo_fractional_integrate(&pseudo_fractional_integrate(&p, s1).unwrap(), s2).unwrap();
        let one = pseudo_fractional_integrate(&p, s1 + s2).unwrap();
        for (a, b) in two.levels().iter().zip(one.levels()) {
            for (x, y) in a.bands[0].iter().zip(&b.bands[0]) {
                prop_assert!((x - y).abs() <= 1e-10 * y.abs().max(1e-300));
            }
        }
        prop_assert!((two.integration_order() - (s1 + s2)).abs() < 1e-15);
        let same = pseudo_fractional_integrate(&p, 0.0).unwrap();
        prop_assert_eq!(same.levels(), p.levels());
    }

    #[test]
    fn legendre_is_concave_and_bounded(
        zeta in prop::collection::vec(-3.0f64..3.0, 9),
        d in prop::sample::select(vec![1.0, 2.0]),
    ) {
        let grid = linear_grid(-2.0, 2.0, 9);
        let mut z = zeta.clone();
        z[4] = 0.0;
        let h = linear_grid(-1.0, 3.0, 81);
        let s = legendre_transform(&grid, &z, d, &h).unwrap();
        for w in s.l.windows(3) {
            prop_assert!(w[0] + w[2] - 2.0 * w[1] <= 1e-10);
        }
        prop_assert!(s.l.iter().all(|l| *l <= d + 1e-12));
        for (l, neg) in s.l.iter().zip(&s.negative) {
            prop_assert_eq!(*l < 0.0, *neg);
        }
    }
}
