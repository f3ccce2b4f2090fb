mod common;

use std::sync::Arc;

use common::*;
use nalgebra::{DVector, RowDVector};
use proptest::prelude::*;
use widom_tau::linalg::{identity, max_abs, CMat, C64};
use widom_tau::plemelj::{kernel_modes_with_tol, VectorFn, RowFn};
use widom_tau::{
    cauchy_modes, kernel_modes, kernel_value, modes_below, solve_dual, widom_derivative, Circle,
    FactorizationPair, KernelSide, LoopConfig, MatrixLoop, RankOneData, RankOneSide, TauError,
};

#[test]
fn cutoff_counts() {
    assert_eq!(modes_below(24.0), 24);
    assert_eq!(modes_below(2.5), 2);
    assert_eq!(modes_below(0.5), 0);
    assert_eq!(modes_below(3.0), 3);
}

#[test]
fn identity_pair_has_zero_kernels() {
    let f = FactorizationPair::identity(2, Circle::unit(), 8);
    for (z, zp) in [(c(1.0, 0.0), c(0.0, 1.0)), (c(0.6, 0.8), c(0.6, 0.8))] {
        for side in [KernelSide::A, KernelSide::D] {
            assert_eq!(max_abs(&kernel_value(&f, side, z, zp).unwrap()), 0.0);
        }
    }
    let m = kernel_modes(&f, 4.0).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert!(max_abs(m.a(i, j)) < 1e-15 && max_abs(m.d(i, j)) < 1e-15);
        }
    }
}

#[test]
fn linear_plus_factor_modes() {
    let eps = 1e-3;
    let p = MatrixLoop::from_modes(1, Circle::unit(), 16, [(0, identity(1)), (1, identity(1) * c(eps, 0.0))]).unwrap();
    let f = FactorizationPair::new(p, MatrixLoop::identity(1, Circle::unit(), 16)).unwrap();
    let m = kernel_modes(&f, 6.0).unwrap();
    // a(w, w') = -eps / (1 + eps w')
    assert!((m.a(0, 0)[(0, 0)] - c(-eps, 0.0)).norm() < 1e-14);
    assert!((m.a(0, 1)[(0, 0)] - c(eps * eps, 0.0)).norm() < 1e-14);
    assert!(m.a(1, 0)[(0, 0)].norm() < 1e-14);
}

#[test]
fn diagonal_limit_matches_difference_quotient() {
    let mut r = rng(20);
    let f = random_pair(&mut r, 2, Circle::new(c(0.2, 0.1), 1.5), 48, 0.12);
    let circle = f.circle();
    for th in [0.3, 1.7, 4.0] {
        let z = circle.point(th);
        for side in [KernelSide::A, KernelSide::D] {
            let diag = kernel_value(&f, side, z, z).unwrap();
            let near = kernel_value(&f, side, z, z + c(1e-5, 0.0) * circle.radius).unwrap();
            assert!(max_abs(&(diag - near)) < 1e-5);
        }
    }
}

#[test]
fn modes_match_exact_convolutions() {
    let mut r = rng(21);
    let f = random_pair(&mut r, 2, Circle::unit(), 48, 0.12);
    let m = kernel_modes_with_tol(&f, 10.0, 1.0).unwrap();
    let (a, d) = exact_modes(&f, 10);
    for i in 0..10 {
        for j in 0..10 {
            assert!(max_abs(&(m.a(i, j) - &a[i][j])) < 1e-12, "a({i},{j})");
            assert!(max_abs(&(m.d(i, j) - &d[i][j])) < 1e-12, "d({i},{j})");
        }
    }
}

#[test]
fn modes_resum_to_kernel() {
    let mut r = rng(22);
    let circle = Circle::new(c(-0.3, 0.4), 0.7);
    let f = random_pair(&mut r, 2, circle, 48, 0.12);
    let m = kernel_modes(&f, 40.0).unwrap();
    let pts = unit_points(16);
    for (k, w) in pts.iter().enumerate() {
        let wp = pts[(k * 5 + 3) % 16];
        let (z, zp) = (circle.from_local(*w), circle.from_local(wp));
        for side in [KernelSide::A, KernelSide::D] {
            let kv = kernel_value(&f, side, z, zp).unwrap() * c(circle.radius, 0.0);
            assert!(max_abs(&(m.resum(side, *w, wp) - kv)) < 1e-9);
        }
    }
}

#[test]
fn mode_tail_failure_is_reported() {
    let mut r = rng(23);
    let f = random_pair(&mut r, 2, Circle::unit(), 48, 0.12);
    // modes decay like 2^-k, so the edge at Q = 4 is far above 1e-10
    let e = kernel_modes(&f, 4.0).unwrap_err();
    assert!(matches!(e, TauError::InsufficientResolution { .. }));
    assert!(kernel_modes_with_tol(&f, 4.0, 0.5).is_ok());
}

fn zero_side(n: usize) -> RankOneSide {
    RankOneSide::zero(n)
}

#[test]
fn cauchy_modes_vanish_for_zero_data() {
    let f = FactorizationPair::identity(2, Circle::unit(), 8);
    let data = RankOneData { plus: zero_side(2), minus: zero_side(2) };
    let m = cauchy_modes(&data, &f, 4.0).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(max_abs(m.a(i, j)), 0.0);
            assert_eq!(max_abs(m.d(i, j)), 0.0);
        }
    }
}

/// `Psi+ = (1 - z/b)^c` and `Psi- = (1 - b'/z)^{c'}` satisfy the
/// differential condition with `Lambda = 0` and rank-one data
/// `phi = c b / (z - b)`, `phibar = 1 / (z' - b)`.
fn scalar_power_case() -> (FactorizationPair, RankOneData) {
    let (b, cp, bm, cm) = (2.5, 0.3, 0.4, -0.7);
    let cfg = LoopConfig::with_window(64);
    let one = c(1.0, 0.0);
    let p = MatrixLoop::from_samples(move |z| CMat::from_element(1, 1, (one - z / b).powf(cp)), 1, Circle::unit(), &cfg)
        .unwrap();
    let m = MatrixLoop::from_samples(move |z| CMat::from_element(1, 1, (one - bm / z).powf(cm)), 1, Circle::unit(), &cfg)
        .unwrap();
    let f = FactorizationPair::new(p, m).unwrap();
    let side = |bb: f64, cc: f64| {
        let phi: VectorFn = Arc::new(move |z: C64| DVector::from_element(1, c(cc * bb, 0.0) / (z - bb)));
        let phibar: RowFn = Arc::new(move |z: C64| RowDVector::from_element(1, (z - bb).inv()));
        RankOneSide { pairs: vec![(phi, phibar)], lambda: vec![c(0.0, 0.0)] }
    };
    (f, RankOneData { plus: side(b, cp), minus: side(bm, cm) })
}

#[test]
fn cauchy_modes_match_kernel_modes_scalar() {
    let (f, data) = scalar_power_case();
    let q = 12.0;
    let km = kernel_modes_with_tol(&f, q, 1e-3).unwrap();
    let cm = cauchy_modes(&data, &f, q).unwrap();
    for i in 0..12 {
        for j in 0..12 {
            assert!(max_abs(&(km.a(i, j) - cm.a(i, j))) < 1e-9, "a({i},{j})");
            assert!(max_abs(&(km.d(i, j) - cm.d(i, j))) < 1e-9, "d({i},{j})");
        }
    }
}

#[test]
fn cauchy_modes_reject_resonance() {
    let (f, mut data) = scalar_power_case();
    data.plus.lambda = vec![c(0.0, 0.0)];
    let mut n2 = data.clone();
    // a 2x2 pair whose Lambda splits by exactly p + q = 1
    let f2 = FactorizationPair::identity(2, Circle::unit(), 8);
    let phi: VectorFn = Arc::new(|_| DVector::from_element(2, c(1.0, 0.0)));
    let phibar: RowFn = Arc::new(|_| RowDVector::from_element(2, c(1.0, 0.0)));
    n2.plus = RankOneSide { pairs: vec![(phi, phibar)], lambda: vec![c(1.0, 0.0), c(0.0, 0.0)] };
    n2.minus = RankOneSide::zero(2);
    let e = cauchy_modes(&n2, &f2, 3.0).unwrap_err();
    assert!(matches!(e, TauError::ResonantExponent { alpha: 0, beta: 1, .. }), "{e}");
    let _ = f;
}

#[test]
fn dual_trivial_cases() {
    let id = MatrixLoop::identity(2, Circle::unit(), 8);
    let d = solve_dual(&id, 8).unwrap();
    assert!(max_abs(&(d.psi_minus.mode(0) - identity(2))) < 1e-15);
    assert!(max_abs(&(d.psi_plus.mode(0) - identity(2))) < 1e-15);

    let mut r = rng(24);
    let modes: Vec<(i64, CMat)> = (0..=4)
        .map(|k| (k, if k == 0 { identity(2) } else { random_matrix(&mut r, 2, 0.3) }))
        .collect();
    let j = MatrixLoop::from_modes(2, Circle::unit(), 8, modes).unwrap();
    let d = solve_dual(&j, 8).unwrap();
    for k in 1..=8 {
        assert!(max_abs(&d.psi_minus.mode(-k)) < 1e-15);
    }
    for k in 0..=4 {
        assert!(max_abs(&(d.psi_plus.mode(k) - j.mode(k))) < 1e-15);
    }
}

#[test]
fn dual_reconstructs_jump() {
    let mut r = rng(25);
    let j = near_identity_loop(&mut r, 2, Circle::unit(), 48, 5, 0.3);
    let d = solve_dual(&j, 40).unwrap();
    assert!(d.residual < 1e-12);
    let minv = d.psi_minus.invert().unwrap();
    for w in unit_points(24) {
        let rec = d.psi_plus.eval_local(w) * minv.eval_local(w);
        assert!(max_abs(&(rec - j.eval_local(w))) < 1e-9);
    }
    assert!(d.psi_plus.tail() < 1e-12 && d.psi_minus.tail() < 1e-12);
}

#[test]
fn dual_unsolvable_is_reported() {
    // J = diag(z, 1/z) has zero total winding but nonzero partial indices
    let mut e1 = CMat::zeros(2, 2);
    e1[(0, 0)] = c(1.0, 0.0);
    let mut e2 = CMat::zeros(2, 2);
    e2[(1, 1)] = c(1.0, 0.0);
    let j = MatrixLoop::from_modes(2, Circle::unit(), 8, [(1, e1), (-1, e2)]).unwrap();
    assert!(matches!(solve_dual(&j, 8), Err(TauError::DualUnsolvable { .. })));
}

#[test]
fn dual_consistency_with_direct_pair() {
    let mut r = rng(26);
    let f = random_pair(&mut r, 2, Circle::unit(), 48, 0.12);
    let j = f.jump().unwrap();
    let d = solve_dual(&j, 40).unwrap();
    for w in unit_points(16) {
        let lhs = f.psi_plus().eval_local(w) * d.psi_minus.eval_local(w);
        let rhs = f.psi_minus().eval_local(w) * d.psi_plus.eval_local(w);
        assert!(max_abs(&(lhs - rhs)) < 1e-8);
    }
}

#[test]
fn derivative_of_constant_family_is_zero() {
    let mut r = rng(27);
    let f = random_pair(&mut r, 2, Circle::unit(), 48, 0.12);
    let v = widom_derivative(|_| Ok(f.clone()), 0.0, 24, 1e-4).unwrap();
    assert!(v.norm() < 1e-12);
}

#[test]
fn derivative_of_szego_family() {
    for t in [0.2, 0.5] {
        let v = widom_derivative(|s| Ok(szego_pair(s, 32)), t, 24, 1e-4).unwrap();
        assert!((v - c(2.0 * t, 0.0)).norm() < 1e-8, "{v}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn index_pattern_and_resummation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_pair(&mut r, 2, Circle::unit(), 48, 0.12);
        let m = kernel_modes(&f, 44.0).unwrap();
        for w in unit_points(4) {
            let wp = w * c(0.0, 1.0);
            for side in [KernelSide::A, KernelSide::D] {
                let kv = kernel_value(&f, side, w, wp).unwrap();
                prop_assert!(max_abs(&(m.resum(side, w, wp) - kv)) < 1e-9);
            }
        }
    }

    #[test]
    fn dual_consistency(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_pair(&mut r, 2, Circle::unit(), 48, 0.12);
        let d = solve_dual(&f.jump().unwrap(), 32).unwrap();
        for w in unit_points(6) {
            let lhs = f.psi_plus().eval_local(w) * d.psi_minus.eval_local(w);
            let rhs = f.psi_minus().eval_local(w) * d.psi_plus.eval_local(w);
            prop_assert!(max_abs(&(lhs - rhs)) < 1e-8);
        }
    }
}
