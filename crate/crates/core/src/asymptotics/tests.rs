use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::ensemble::{scaled_gaussian, similar_to_unitary, unitary_plus_contraction};
use crate::models::{gallery, GalleryParams, Tail, WeightRule};

fn dense(rows: &[&[f64]]) -> OperatorModel {
    OperatorModel::dense(ComplexMatrix::from_real_rows(rows).unwrap()).unwrap()
}

fn g(name: &str, kv: &[(&str, f64)]) -> OperatorModel {
    let p: GalleryParams = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    gallery(name, &p).unwrap()
}

fn diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.sub(b).max_abs()
}

fn half_one() -> OperatorModel {
    dense(&[&[0.5, 0.0], &[0.0, 1.0]])
}

#[test]
fn grams_of_simple_operators() {
    let s = power_grams(&OperatorModel::dense(ComplexMatrix::identity(3)).unwrap(), 5).unwrap();
    for n in 0..=5 {
        assert_eq!(s.gram(n).matrix(), &ComplexMatrix::identity(3));
    }
    let s = power_grams(&half_one(), 6).unwrap();
    for n in 0..=6 {
        let want = ComplexMatrix::from_real_diag(&[4f64.powi(-(n as i32)), 1.0]);
        assert!(diff(s.gram(n).matrix(), &want) < 1e-15);
    }
}

#[test]
fn grams_overflow() {
    let t = dense(&[&[100.0]]);
    assert!(matches!(power_grams(&t, 10), Err(AsymptoticsError::Overflow { n: 4, .. })));
}

#[test]
fn contraction_grams_are_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = OperatorModel::dense(scaled_gaussian(&mut rng, 6, 0.95)).unwrap();
    let s = power_grams(&t, 100).unwrap();
    for n in 0..100 {
        assert!(s.monotonicity_margin(n).unwrap() >= -1e-10);
        s.psd(n).unwrap();
    }
}

#[test]
fn contraction_limits() {
    let r = contraction_asymptotic_limit(&half_one(), 1e-10, DEFAULT_GRAM_HORIZON).unwrap();
    assert!(diff(r.limit.matrix(), &ComplexMatrix::from_real_diag(&[0.0, 1.0])) < 1e-10);
    assert!(r.intertwining_residual <= 10.0 * r.tolerance);
    let r = contraction_asymptotic_limit(&dense(&[&[0.0, 1.0], &[0.0, 0.0]]), 1e-10, 64).unwrap();
    assert_eq!(r.limit.matrix().max_abs(), 0.0);
    let r = contraction_asymptotic_limit(&g("rotation", &[]), 1e-10, 64).unwrap();
    assert!(diff(r.limit.matrix(), &ComplexMatrix::identity(2)) < 1e-12);
}

#[test]
fn contraction_preconditions() {
    assert!(matches!(
        contraction_asymptotic_limit(&g("scaled_identity", &[]), 1e-8, 64),
        Err(AsymptoticsError::NotAContraction { .. })
    ));
    assert!(matches!(
        contraction_asymptotic_limit(&g("beta_shift", &[]), 1e-8, 64),
        Err(AsymptoticsError::NotDense { .. })
    ));
    // ‖T‖ = 1 - 1e-4 decays too slowly for 2⁶ steps
    let slow = dense(&[&[1.0 - 1e-4]]);
    match contraction_asymptotic_limit(&slow, 1e-10, 64) {
        Err(AsymptoticsError::SlowConvergence { partial }) => assert_eq!(partial.iterations, 64),
        other => panic!("{other:?}"),
    }
}

#[test]
fn cesaro_limits() {
    let r = cesaro_asymptotic_limit(&OperatorModel::dense(ComplexMatrix::identity(3)).unwrap(), 1e-8, 1 << 10).unwrap();
    assert!(diff(r.limit.matrix(), &ComplexMatrix::identity(3)) < 1e-14);
    let r =
        cesaro_asymptotic_limit(&g("jordan_plus_identity", &[("beta", 5.0)]), 1e-8, DEFAULT_CESARO_HORIZON).unwrap();
    assert!(diff(r.limit.matrix(), &ComplexMatrix::from_real_diag(&[0.0, 0.0, 1.0])) < 1e-8);
    let r = cesaro_asymptotic_limit(&half_one(), 1e-8, DEFAULT_CESARO_HORIZON).unwrap();
    assert!(diff(r.limit.matrix(), &ComplexMatrix::from_real_diag(&[0.0, 1.0])) < 1e-8);
    assert!(r.intertwining_residual <= 10.0 * r.tolerance);
}

#[test]
fn cesaro_of_rotation_similarity() {
    // Q is the unique invariant form with trace normalised by the averaging
    let t = g("similar_rotation", &[]);
    let r = cesaro_asymptotic_limit(&t, 1e-10, DEFAULT_CESARO_HORIZON).unwrap();
    assert!(r.intertwining_residual < 1e-9);
    assert!(r.limit.min_eigenvalue() > 0.1);
    // brute-force mean over 2¹⁶ terms agrees to O(1/n)
    let m = t.to_dense().unwrap();
    let mut st = CesaroState::new(&m);
    while st.n() < 1 << 16 {
        st.step();
    }
    assert!(diff(st.q(), r.limit.matrix()) < 1e-3);
}

#[test]
fn cesaro_divergence() {
    for name in ["scaled_identity", "unipotent_jordan"] {
        match cesaro_asymptotic_limit(&g(name, &[]), 1e-8, DEFAULT_CESARO_HORIZON) {
            Err(AsymptoticsError::Divergent { .. }) => {}
            other => panic!("{name}: {other:?}"),
        }
    }
}

#[test]
fn cesaro_state_update_and_identity() {
    let t = ComplexMatrix::from_real_rows(&[&[0.3, 2.0], &[0.0, -0.9]]).unwrap();
    let mut st = CesaroState::new(&t);
    assert_eq!(st.q(), &ComplexMatrix::identity(2));
    let mut direct = ComplexMatrix::zeros(2, 2);
    let mut p = ComplexMatrix::identity(2);
    for n in 1..=40 {
        direct = direct.add(&p.congruence(&ComplexMatrix::identity(2)));
        p = p.matmul(&t);
        assert_eq!(st.n(), n);
        assert!(diff(st.q(), &direct.scale(1.0 / n as f64)) < 1e-12, "n = {n}");
        assert!(st.recurrence_residual() < 1e-10);
        st.step();
    }
    st.q_psd().unwrap();
}

#[test]
fn cesaro_history_tracks_reference() {
    let t = ComplexMatrix::from_real_diag(&[0.5, 1.0]);
    let q = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
    let mut st = CesaroState::new(&t).with_reference(&q);
    for _ in 0..50 {
        st.step();
    }
    let h = st.history();
    assert_eq!(h.len(), 51);
    assert!(h.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn quadratic_form_examples() {
    let shift = g("beta_shift", &[("beta", 2.0)]);
    let e1 = SupportedVector::basis(0);
    assert_eq!(cesaro_quadratic_form(&shift, &e1, 4, 0).unwrap(), 3.25);
    assert_eq!(cesaro_quadratic_form(&shift, &e1, 4, 1).unwrap(), 4.0);
    let id = g("identity", &[("dim", 3.0)]);
    let x = SupportedVector::from_pairs([(0, Complex64::new(1.0, 2.0)), (2, Complex64::new(0.0, -1.0))]);
    for (n, j) in [(1, 0), (7, 3), (100, 50)] {
        assert!((cesaro_quadratic_form(&id, &x, n, j).unwrap() - 6.0).abs() < 1e-14);
    }
}

#[test]
fn quadratic_form_matches_dense_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = similar_to_unitary(&mut rng, 5, 4.0);
    let t = OperatorModel::dense(m.clone()).unwrap();
    let mut st = CesaroState::new(&m);
    for n in 1..=64 {
        for i in 0..5 {
            let x = SupportedVector::basis(i);
            let form = cesaro_quadratic_form(&t, &x, n, 0).unwrap();
            assert!((form - st.q()[(i, i)].re).abs() < 1e-10);
        }
        st.step();
    }
}

#[test]
fn intertwining_examples() {
    let rot = g("rotation", &[]);
    assert!(intertwining_residual(&rot, &HermitianMatrix::identity(2)).unwrap() < 1e-15);
    assert_eq!(intertwining_residual(&half_one(), &HermitianMatrix::from_real_diag(&[0.0, 1.0])).unwrap(), 0.0);
    let a = HermitianMatrix::new(ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap()).unwrap();
    assert_eq!(intertwining_residual(&g("identity", &[]), &a).unwrap(), 0.0);
    assert!(intertwining_residual(&rot, &HermitianMatrix::identity(3)).is_err());
}

#[test]
fn kernel_examples() {
    let a = PsdMatrix::new(HermitianMatrix::from_real_diag(&[0.0, 1.0])).unwrap();
    let k = kernel_of_limit(&a, &half_one(), 1e-8).unwrap();
    assert_eq!(k.basis.len(), 1);
    assert!(k.basis[0][0].norm() > 0.999);
    assert!(k.cross_check);
    let k = kernel_of_limit(&PsdMatrix::identity(2), &g("rotation", &[]), 1e-8).unwrap();
    assert!(k.basis.is_empty() && k.cross_check);
    let zero = PsdMatrix::new(HermitianMatrix::zeros(2)).unwrap();
    let k = kernel_of_limit(&zero, &g("jordan", &[]), 1e-8).unwrap();
    assert_eq!(k.basis.len(), 2);
    assert!(k.cross_check);
    // a wrong limit is caught
    let k = kernel_of_limit(&PsdMatrix::identity(2), &half_one(), 1e-8).unwrap();
    assert!(!k.cross_check);
}

#[test]
fn cesaro_power_bound_examples() {
    let id = g("identity", &[]);
    assert_eq!(cesaro_power_bounds(&id, None, 20).unwrap(), (1.0, 1.0));
    let (a, b) = cesaro_power_bounds(&g("rotation", &[]), None, 50).unwrap();
    assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    // diag(1/2, 1): first entry of Qₙ is (4/3)(1 − 4⁻ⁿ)/n
    let (a, b) = cesaro_power_bounds(&half_one(), None, 200).unwrap();
    let want = (4.0 / 3.0) * (1.0 - 4f64.powi(-200)) / 200.0;
    assert!((a - want).abs() < 1e-12);
    assert!(b <= 1.0 + 1e-12);
    let singular = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
    assert!(matches!(
        cesaro_power_bounds(&id, Some(&singular), 4),
        Err(AsymptoticsError::Linalg(LinalgError::Singular { .. }))
    ));
}

#[test]
fn items_for_diagonal_contraction() {
    let t = half_one();
    let r = contraction_asymptotic_limit(&t, 1e-10, DEFAULT_GRAM_HORIZON).unwrap();
    let items = verify_theorem_items(&t, &r, ItemSet::Contraction).unwrap();
    for (k, v) in &items {
        assert!(v.passed, "{k}: {v:?}");
    }
    assert!(items["commutation"].note.contains("LT=TL=true"));
    assert!(items["commutation"].note.contains("L=L^2=true"));
}

#[test]
fn items_for_rotation_and_jordan() {
    let t = g("rotation", &[]);
    let r = cesaro_asymptotic_limit(&t, 1e-8, DEFAULT_CESARO_HORIZON).unwrap();
    let items = verify_theorem_items(&t, &r, ItemSet::Cesaro).unwrap();
    for (k, v) in &items {
        assert!(v.passed, "{k}: {v:?}");
    }
    assert!(items["positive_equivalences"].note.contains("T isometry=true"));
    let t = g("jordan_plus_identity", &[("beta", 5.0)]);
    let r = cesaro_asymptotic_limit(&t, 1e-8, DEFAULT_CESARO_HORIZON).unwrap();
    for which in [ItemSet::Cesaro, ItemSet::BanachLimit] {
        let items = verify_theorem_items(&t, &r, which).unwrap();
        for (k, v) in &items {
            assert!(v.passed, "{k}: {v:?}");
        }
        assert_eq!(items["norm_one"].residual, 0.0);
    }
}

#[test]
fn items_across_gallery() {
    for name in ["similar_rotation", "skew_involution", "mixed_triangular", "identity", "jordan"] {
        let t = g(name, &[]);
        let r = cesaro_asymptotic_limit(&t, 1e-9, DEFAULT_CESARO_HORIZON).unwrap();
        let items = verify_theorem_items(&t, &r, ItemSet::Cesaro).unwrap();
        for (k, v) in &items {
            assert!(v.passed, "{name}/{k}: {v:?}");
        }
    }
}

#[test]
fn wrong_limit_fails_items() {
    let t = half_one();
    let mut r = contraction_asymptotic_limit(&t, 1e-10, DEFAULT_GRAM_HORIZON).unwrap();
    r.limit = PsdMatrix::identity(2);
    let items = verify_theorem_items(&t, &r, ItemSet::Contraction).unwrap();
    assert!(!items["fixed_point"].passed);
    assert!(!items["kernel"].passed);
}

#[test]
fn contraction_and_cesaro_agree_on_seeded_ensemble() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..6 {
        let dim = 3 + i;
        let m = if i % 2 == 0 {
            scaled_gaussian(&mut rng, dim, 0.97)
        } else {
            unitary_plus_contraction(&mut rng, dim, 2, 0.8)
        };
        let t = OperatorModel::dense(m).unwrap();
        let a = contraction_asymptotic_limit(&t, 1e-7, DEFAULT_GRAM_HORIZON).unwrap();
        let q = cesaro_asymptotic_limit(&t, 1e-7, DEFAULT_CESARO_HORIZON).unwrap();
        assert!(diff(a.limit.matrix(), q.limit.matrix()) < 1e-5, "case {i}");
    }
}

#[test]
fn isometry_verdict_matches_identity_limit() {
    let names: [(&str, &[(&str, f64)]); 6] = [
        ("rotation", &[]),
        ("identity", &[]),
        ("similar_rotation", &[]),
        ("skew_involution", &[]),
        ("mixed_triangular", &[]),
        ("jordan_plus_identity", &[]),
    ];
    for (name, kv) in names {
        let t = g(name, kv);
        let q = cesaro_asymptotic_limit(&t, 1e-9, DEFAULT_CESARO_HORIZON).unwrap();
        let is_identity = diff(q.limit.matrix(), &ComplexMatrix::identity(q.limit.dim())) <= 1e-8;
        let c = classify(&t, 1024, 1e-8).unwrap();
        assert_eq!(c.isometry.holds, is_identity, "{name}");
    }
    let shift = OperatorModel::WeightedShift(WeightRule::new(vec![], Tail::Constant(1.0)).unwrap());
    assert!(classify(&shift, 512, 1e-8).unwrap().isometry.holds);
}

fn contraction_strategy() -> impl Strategy<Value = (u64, usize, f64)> {
    (any::<u64>(), 2usize..7, 0.3f64..0.98)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fixed_point_and_bounds_for_contractions((seed, dim, norm) in contraction_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = OperatorModel::dense(unitary_plus_contraction(&mut rng, dim, seed as usize % dim, norm)).unwrap();
        let r = contraction_asymptotic_limit(&t, 1e-9, DEFAULT_GRAM_HORIZON).unwrap();
        prop_assert!(r.intertwining_residual <= 10.0 * r.tolerance);
        let e = hermitian_eig(r.limit.hermitian()).unwrap();
        prop_assert!(e.min_eigenvalue() >= -1e-10);
        prop_assert!(e.max_eigenvalue() <= 1.0 + 1e-10);
        let s = power_grams(&t, 30).unwrap();
        for n in 0..30 {
            prop_assert!(s.monotonicity_margin(n).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn cesaro_dominance_and_recurrence((seed, dim) in (any::<u64>(), 2usize..6), cond in 1.0f64..8.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = similar_to_unitary(&mut rng, dim, cond);
        let t = OperatorModel::dense(m.clone()).unwrap();
        let c = classify(&t, 512, 1e-8).unwrap();
        prop_assert!(c.power_bounded.holds);
        let bound = c.beta_hat * c.beta_hat + 1e-8;
        let mut st = CesaroState::new(&m);
        for _ in 0..200 {
            prop_assert!(st.recurrence_residual() <= 1e-10 * bound.max(1.0));
            let e = hermitian_eig(&HermitianMatrix::new(st.q().clone()).unwrap()).unwrap();
            prop_assert!(e.max_eigenvalue() <= bound);
            st.step();
        }
        let q = cesaro_asymptotic_limit(&t, 1e-8, DEFAULT_CESARO_HORIZON).unwrap();
        prop_assert!(q.intertwining_residual <= 10.0 * q.tolerance);
        prop_assert!(hermitian_eig(q.limit.hermitian()).unwrap().max_eigenvalue() <= bound);
    }

    #[test]
    fn quadratic_form_is_diagonal_of_mean(seed in any::<u64>(), n in 1usize..80) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = scaled_gaussian(&mut rng, 4, 1.2);
        let t = OperatorModel::dense(m.clone()).unwrap();
        let mut st = CesaroState::new(&m);
        while st.n() < n {
            st.step();
        }
        for i in 0..4 {
            let f = cesaro_quadratic_form(&t, &SupportedVector::basis(i), n, 0).unwrap();
            prop_assert!((f - st.q()[(i, i)].re).abs() <= 1e-10 * f.abs().max(1.0));
        }
    }
}
