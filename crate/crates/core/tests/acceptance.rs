//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed. Built without the libtest harness so the
//! lines are always visible.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use asymptotica::asymptotics::{
    cesaro_asymptotic_limit, cesaro_quadratic_form, classify, contraction_asymptotic_limit, kernel_of_limit,
    verify_theorem_items, AsymptoticsError, ItemSet, DEFAULT_CESARO_HORIZON, DEFAULT_CLASSIFY_HORIZON,
    DEFAULT_GRAM_HORIZON,
};
use asymptotica::ensemble::{
    default_probes, gaussian_matrix, gaussian_rect, random_normal, random_unitary, scaled_gaussian, similar_to_unitary,
    unitary_plus_contraction,
};
use asymptotica::envelope::{
    banach_axiom_suite, envelope, estimate, phi_asymptotic_form, q_equals_aphi_certificate, shifted_cesaro,
    vector_envelope, AxiomSuiteConfig, BoundedSequence, DEFAULT_ORBIT_HORIZON,
};
use asymptotica::linalg::{hermitian_eig, operator_norm, polar_decompose, psd_sqrt, ComplexMatrix, PsdMatrix};
use asymptotica::models::{gallery, GalleryParams, OperatorModel, SupportedVector};
use asymptotica::witness::{isometry_witness, nagy_unitarization, norm_equivalence_constants, Operand, WitnessError};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> String + '_ {
    move |e| format!("{context}: {e}")
}

fn named(name: &str, params: &[(&str, f64)]) -> OperatorModel {
    let p: GalleryParams = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    gallery(name, &p).expect("gallery entry")
}

fn dense(m: ComplexMatrix) -> OperatorModel {
    OperatorModel::dense(m).expect("finite square matrix")
}

fn norm_of(m: &ComplexMatrix) -> f64 {
    if m.max_abs() == 0.0 {
        0.0
    } else {
        operator_norm(m).expect("svd")
    }
}

fn beta_shift_envelopes() -> Check {
    let t = named("beta_shift", &[("beta", 2.0)]);
    let e1 = SupportedVector::basis(0);
    let est = vector_envelope(&t, &e1, DEFAULT_ORBIT_HORIZON).map_err(err("envelope at e1"))?;
    ensure!(
        (est.phi_minus - 4.0).abs() <= 1e-6 && (est.phi_plus - 4.0).abs() <= 1e-6,
        "envelope at e1 is ({}, {})",
        est.phi_minus,
        est.phi_plus
    );
    let mean = cesaro_quadratic_form(&t, &e1, 1 << 12, 0).map_err(err("Cesaro form"))?;
    // oracle: ‖T⁰e₁‖² = 1 and ‖Tᵏe₁‖² = 4 for k ≥ 1
    let oracle = (1.0 + 4.0 * 4095.0) / 4096.0;
    ensure!((mean - oracle).abs() <= 1e-12, "Cesaro form {mean} vs closed form {oracle}");
    ensure!((mean - 4.0).abs() <= 1e-3, "Cesaro form {mean} is not within 1e-3 of 4");
    let mut worst = 0.0f64;
    for i in 1..=32 {
        let est = vector_envelope(&t, &SupportedVector::basis(i), DEFAULT_ORBIT_HORIZON).map_err(err("envelope"))?;
        worst = worst.max((est.phi_minus - 1.0).abs()).max((est.phi_plus - 1.0).abs());
    }
    ensure!(worst <= 1e-6, "envelopes at e2..e33 deviate from 1 by {worst:e}");
    Ok(format!("e1 -> ({}, {}), Cesaro mean {mean:.6}, worst other deviation {worst:.1e}", est.phi_minus, est.phi_plus))
}

fn jordan_plus_identity_example() -> Check {
    let t = named("jordan_plus_identity", &[("beta", 5.0)]);
    let want = ComplexMatrix::from_real_diag(&[0.0, 0.0, 1.0]);
    let q = cesaro_asymptotic_limit(&t, 1e-8, DEFAULT_CESARO_HORIZON).map_err(err("Cesaro limit"))?;
    let dq = q.limit.matrix().sub(&want).max_abs();
    ensure!(dq <= 1e-8, "Q differs from diag(0,0,1) by {dq:e}");
    let basis: Vec<SupportedVector> = (0..3).map(SupportedVector::basis).collect();
    let form = phi_asymptotic_form(&t, &basis, DEFAULT_ORBIT_HORIZON).map_err(err("phi form"))?;
    ensure!(form.certified_equal_to_q.holds, "phi form not certified equal to Q");
    let rebuilt = form.reconstructed.ok_or("no reconstructed form")?;
    let da = rebuilt.matrix().sub(&want).max_abs();
    ensure!(da <= 1e-8, "A_phi differs from diag(0,0,1) by {da:e}");
    let norm_t = norm_of(&t.to_dense().unwrap());
    let norm_q = norm_of(q.limit.matrix());
    ensure!((norm_t - 5.0).abs() <= 1e-8, "||T|| = {norm_t}");
    ensure!((norm_q - 1.0).abs() <= 1e-8, "||Q|| = {norm_q}");
    Ok(format!("|Q - diag(0,0,1)| = {dq:.1e}, |A_phi - diag(0,0,1)| = {da:.1e}, ||T|| = {norm_t}, ||Q|| = {norm_q}"))
}

/// Twenty seeded contractions: even cases are Ginibre matrices scaled to a
/// norm in `[0.5, 0.99]`, odd cases have a unitary block and norm one.
fn contraction_ensemble() -> Vec<(OperatorModel, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    (0..20)
        .map(|i| {
            let dim = rng.gen_range(4..=16);
            let m = if i % 2 == 0 {
                let norm = rng.gen_range(0.5..=0.99);
                scaled_gaussian(&mut rng, dim, norm)
            } else {
                let k = rng.gen_range(1..dim);
                unitary_plus_contraction(&mut rng, dim, k, 0.9)
            };
            let norm = norm_of(&m);
            (dense(m), norm)
        })
        .collect()
}

fn contraction_limits(ensemble: &[(OperatorModel, f64)]) -> Check {
    let mut worst_fixed = 0.0f64;
    let mut items = 0;
    for (case, (t, norm)) in ensemble.iter().enumerate() {
        let bound = if case % 2 == 0 { *norm <= 0.99 + 1e-12 } else { (norm - 1.0).abs() <= 1e-12 };
        ensure!(bound, "case {case}: ||T|| = {norm} is outside its variant");
        let r = contraction_asymptotic_limit(t, 1e-10, DEFAULT_GRAM_HORIZON).map_err(err(&format!("case {case}")))?;
        worst_fixed = worst_fixed.max(r.intertwining_residual);
        ensure!(r.intertwining_residual <= 1e-6, "case {case}: ||T*AT - A|| = {:e}", r.intertwining_residual);
        let eig = hermitian_eig(r.limit.hermitian()).map_err(err("eig"))?;
        ensure!(
            eig.min_eigenvalue() >= -1e-8 && eig.max_eigenvalue() <= 1.0 + 1e-8,
            "case {case}: spectrum of A in [{}, {}]",
            eig.min_eigenvalue(),
            eig.max_eigenvalue()
        );
        let kernel = kernel_of_limit(&r.limit, t, 1e-6).map_err(err("kernel"))?;
        ensure!(kernel.cross_check, "case {case}: kernel cross-check failed");
        let checks = verify_theorem_items(t, &r, ItemSet::Contraction).map_err(err("items"))?;
        if let Some((name, c)) = checks.iter().find(|(_, c)| !c.passed) {
            return Err(format!("case {case}: item {name} failed ({:e} > {:e}: {})", c.residual, c.tolerance, c.note));
        }
        items += checks.len();
    }
    Ok(format!("{} operators, worst ||T*AT - A|| = {worst_fixed:.1e}, {items} item checks passed", ensemble.len()))
}

fn cesaro_matches_contraction_limit(ensemble: &[(OperatorModel, f64)]) -> Check {
    let mut worst = 0.0f64;
    for (case, (t, _)) in ensemble.iter().enumerate() {
        let a = contraction_asymptotic_limit(t, 1e-7, DEFAULT_GRAM_HORIZON).map_err(err(&format!("A, case {case}")))?;
        let q = cesaro_asymptotic_limit(t, 1e-7, DEFAULT_CESARO_HORIZON).map_err(err(&format!("Q, case {case}")))?;
        let d = norm_of(&q.limit.matrix().sub(a.limit.matrix()));
        worst = worst.max(d);
        ensure!(d <= 1e-5, "case {case}: ||Q - A|| = {d:e}");
    }
    Ok(format!("worst ||Q - A|| = {worst:.1e} over {} operators", ensemble.len()))
}

fn nagy_unitarization_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a6e);
    let mut worst = 0.0f64;
    let mut worst_cond = 0.0f64;
    for case in 0..10 {
        let dim = rng.gen_range(4..=16);
        let cond = rng.gen_range(1.5..=10.0);
        let t = dense(similar_to_unitary(&mut rng, dim, cond));
        let w = nagy_unitarization(&t, 4096, 1e-8).map_err(err(&format!("case {case} (dim {dim}, cond {cond:.2})")))?;
        let r = w.unitary_residual.ok_or(format!("case {case}: no unitary residual"))?;
        ensure!(r <= 1e-6, "case {case}: unitary residual {r:e}");
        worst = worst.max(r);
        worst_cond = worst_cond.max(w.condition);
    }
    let half = dense(ComplexMatrix::from_real_diag(&[0.5, 1.0]));
    match nagy_unitarization(&half, 4096, 1e-8) {
        Err(WitnessError::NotPowerBounded { operand: Operand::Inverse, .. }) => {}
        other => return Err(format!("diag(1/2, 1) was not rejected as NotPowerBounded: {other:?}")),
    }
    Ok(format!("worst unitary residual {worst:.1e}, worst cond(S) {worst_cond:.1}; diag(1/2, 1) rejected"))
}

/// Independent oracle: every shifted mean at window `n` by direct summation.
fn brute_sweep(xs: &BoundedSequence, n: usize, j_range: std::ops::RangeInclusive<usize>) -> (f64, f64) {
    j_range
        .map(|j| shifted_cesaro(xs, n, j).expect("window inside the sample"))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m), hi.max(m)))
}

/// Envelope gap of the doubling-block sequence at `N = 2^16`, frozen from
/// `brute_sweep`.
const DOUBLING_BLOCK_GAP: f64 = 1.0;

fn lorentz_envelopes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e57);
    let len = 1 << 14;
    let mut worst_gap = 0.0f64;
    let mut worst_mid = 0.0f64;
    for period_len in 2..=7 {
        for _ in 0..4 {
            let period: Vec<f64> = (0..period_len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let mean = period.iter().sum::<f64>() / period_len as f64;
            // with the periodic tail
            let tailed = estimate(&BoundedSequence::periodic(&period, len).map_err(err("sequence"))?)
                .map_err(err("estimate"))?;
            // sample only, on windows spanning whole periods
            let sample: Vec<f64> = (0..len).map(|k| period[k % period_len]).collect();
            let grid: Vec<usize> = (6..=10).map(|k| period_len << k).collect();
            let swept = envelope(&BoundedSequence::from_sample(sample).map_err(err("sequence"))?, &grid, len)
                .map_err(err("sweep"))?;
            for est in [&tailed, &swept] {
                worst_gap = worst_gap.max(est.gap());
                worst_mid = worst_mid.max((est.midpoint() - mean).abs());
            }
        }
    }
    ensure!(worst_gap <= 1e-9, "periodic gap {worst_gap:e}");
    ensure!(worst_mid <= 1e-9, "periodic midpoint off the period mean by {worst_mid:e}");

    let blocks = BoundedSequence::doubling_blocks(1 << 16);
    let est = estimate(&blocks).map_err(err("doubling blocks"))?;
    let (lo, hi) = brute_sweep(&blocks, est.n_used, est.burn_in..=blocks.len() - est.n_used);
    ensure!(
        (est.phi_minus - lo).abs() <= 1e-12 && (est.phi_plus - hi).abs() <= 1e-12,
        "sweep ({}, {}) vs brute force ({lo}, {hi})",
        est.phi_minus,
        est.phi_plus
    );
    ensure!(est.gap() >= 0.1, "doubling-block gap {}", est.gap());
    ensure!((est.gap() - DOUBLING_BLOCK_GAP).abs() <= 1e-12, "doubling-block gap {} moved", est.gap());
    Ok(format!("periodic worst gap {worst_gap:.1e}, midpoint error {worst_mid:.1e}; doubling-block gap {}", est.gap()))
}

fn quasinormal_certificates() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a51);
    let mut worst_form = 0.0f64;
    for case in 0..20 {
        let dim = rng.gen_range(2..=8);
        let t = dense(random_normal(&mut rng, dim));
        let q = cesaro_asymptotic_limit(&t, 1e-9, DEFAULT_CESARO_HORIZON).map_err(err(&format!("Q, case {case}")))?;
        let basis: Vec<SupportedVector> = (0..dim).map(SupportedVector::basis).collect();
        let q_form: Vec<f64> = (0..dim).map(|i| q.limit.matrix()[(i, i)].re).collect();
        let cert = q_equals_aphi_certificate(&t, &q_form, &basis, DEFAULT_ORBIT_HORIZON, 1e-6)
            .map_err(err(&format!("certificate, case {case}")))?;
        ensure!(cert.certified, "case {case}: certificate false (worst deviation {:e})", cert.worst_deviation);
        let form = phi_asymptotic_form(&t, &basis, DEFAULT_ORBIT_HORIZON).map_err(err("phi form"))?;
        let rebuilt = form.reconstructed.ok_or(format!("case {case}: phi form not reconstructed"))?;
        let d = norm_of(&rebuilt.matrix().sub(q.limit.matrix()));
        ensure!(d <= 1e-6, "case {case}: ||A_phi - Q|| = {d:e}");
        worst_form = worst_form.max(d);
    }

    for weight in [1.0, 0.7] {
        let t = named("unilateral_shift", &[("weight", weight)]);
        let probes = default_probes(&t, 11);
        // ‖Tⁿx‖² = w²ⁿ‖x‖², so ⟨Qx; x⟩ is ‖x‖² for w = 1 and 0 below
        let on = if weight == 1.0 { 1.0 } else { 0.0 };
        let q_form: Vec<f64> = probes.iter().map(|x| on * x.norm_sqr()).collect();
        let cert = q_equals_aphi_certificate(&t, &q_form, &probes, DEFAULT_ORBIT_HORIZON, 1e-6)
            .map_err(err("shift certificate"))?;
        ensure!(cert.certified, "shift with weight {weight}: certificate false");
        let few: Vec<SupportedVector> = probes.iter().take(4).chain(probes.iter().skip(16).take(2)).cloned().collect();
        let form = phi_asymptotic_form(&t, &few, DEFAULT_ORBIT_HORIZON).map_err(err("shift phi form"))?;
        let rebuilt = form.reconstructed.ok_or(format!("shift with weight {weight}: phi form not reconstructed"))?;
        let mut gram = ComplexMatrix::zeros(few.len(), few.len());
        for (i, xi) in few.iter().enumerate() {
            for (j, xj) in few.iter().enumerate() {
                let z: Complex64 = xj.iter().map(|(k, a)| a * xi.get(k).conj()).sum();
                gram[(i, j)] = z * on;
            }
        }
        let d = norm_of(&rebuilt.matrix().sub(&gram));
        ensure!(d <= 1e-6, "shift with weight {weight}: ||A_phi - Q|| on probes = {d:e}");
        worst_form = worst_form.max(d);
    }

    let blocks = named("block_shift", &[]);
    let e1 = SupportedVector::basis(0);
    let horizon = 1 << 16;
    let q = cesaro_quadratic_form(&blocks, &e1, horizon, 0).map_err(err("block shift form"))?;
    let cert =
        q_equals_aphi_certificate(&blocks, &[q], &[e1], horizon, 1e-6).map_err(err("block shift certificate"))?;
    ensure!(!cert.certified, "block shift certified at e1");
    Ok(format!(
        "20 normal matrices and 2 shifts certified, worst ||A_phi - Q|| {worst_form:.1e}; block shift refused (deviation {:.3})",
        cert.worst_deviation
    ))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Family {
    Isometry,
    SimilarToIsometry,
    StronglyStable,
    Mixed,
    PowerUnbounded,
}

fn lattice() -> Vec<(&'static str, Family, OperatorModel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a77);
    vec![
        ("identity", Family::Isometry, named("identity", &[("dim", 3.0)])),
        ("rotation", Family::Isometry, named("rotation", &[])),
        ("random unitary", Family::Isometry, dense(random_unitary(&mut rng, 5))),
        ("similar rotation", Family::SimilarToIsometry, named("similar_rotation", &[("scale", 3.0)])),
        ("similar unitary", Family::SimilarToIsometry, dense(similar_to_unitary(&mut rng, 6, 5.0))),
        ("skew involution", Family::SimilarToIsometry, named("skew_involution", &[])),
        ("nilpotent", Family::StronglyStable, named("jordan", &[("beta", 3.0)])),
        ("scaled gaussian", Family::StronglyStable, dense(scaled_gaussian(&mut rng, 4, 0.9))),
        ("half and one", Family::Mixed, dense(ComplexMatrix::from_real_diag(&[0.5, 1.0]))),
        ("jordan plus identity", Family::Mixed, named("jordan_plus_identity", &[("beta", 5.0)])),
        ("unipotent", Family::PowerUnbounded, named("unipotent_jordan", &[])),
        ("expanding", Family::PowerUnbounded, named("scaled_identity", &[("dim", 2.0), ("scale", 1.05)])),
    ]
}

fn classification_lattice() -> Check {
    let mut violations = Vec::new();
    let mut witnesses = 0;
    for (name, family, t) in lattice() {
        let c = classify(&t, DEFAULT_CLASSIFY_HORIZON, 1e-8).map_err(err(name))?;
        let mut violate = |what: &str| violations.push(format!("{name}: {what}"));
        let expected_bounded = family != Family::PowerUnbounded;
        if c.power_bounded.holds != expected_bounded {
            violate("power-bounded verdict");
        }
        if family == Family::Isometry && !c.isometry.holds {
            violate("isometry verdict");
        }
        if family == Family::StronglyStable && !c.class_c0.holds {
            violate("strong stability verdict");
        }
        if c.isometry.holds && !c.similar_to_isometry {
            violate("isometry without similarity to an isometry");
        }
        // (b): power bounded and power bounded below
        let bounded_both_ways = c.power_bounded.holds && c.power_bounded_below.holds;
        if c.similar_to_isometry != bounded_both_ways {
            violate("similarity verdict differs from the two power bounds");
        }
        // (a): an explicit witness S = Q^{1/2}
        let q = if c.power_bounded.holds {
            Some(cesaro_asymptotic_limit(&t, 1e-8, DEFAULT_CESARO_HORIZON).map_err(err(name))?.limit)
        } else {
            match cesaro_asymptotic_limit(&t, 1e-8, DEFAULT_CESARO_HORIZON) {
                Err(AsymptoticsError::Divergent { .. }) => None,
                other => return Err(format!("{name}: Cesaro limit of an unbounded operator gave {other:?}")),
            }
        };
        let (q_invertible, norms_equivalent, witnessed) = match &q {
            Some(q) => {
                let eig = hermitian_eig(q.hermitian()).map_err(err("eig"))?;
                let invertible = eig.min_eigenvalue() > 1e-8 * eig.max_eigenvalue();
                let equivalent = norm_equivalence_constants(q).is_ok();
                let witness = isometry_witness(&t, q);
                if let Ok(w) = &witness {
                    if w.isometry_residual > 1e-6 || w.gram_residual > 1e-6 {
                        violate("witness residuals above 1e-6");
                    }
                }
                (invertible, equivalent, witness.is_ok())
            }
            None => (false, false, false),
        };
        if witnessed != bounded_both_ways {
            violate("witness existence differs from the two power bounds");
        }
        if c.power_bounded.holds {
            let four = [q_invertible, norms_equivalent, witnessed, c.power_bounded_below.holds];
            if four.iter().any(|&v| v != four[0]) {
                violate(&format!("Q invertible / norms equivalent / witness / bounded below = {four:?}"));
            }
        }
        let expected_witness = matches!(family, Family::Isometry | Family::SimilarToIsometry);
        if witnessed != expected_witness {
            violate("witness found on the wrong family");
        }
        witnesses += witnessed as usize;
    }
    ensure!(violations.is_empty(), "{} violations: {}", violations.len(), violations.join("; "));
    Ok(format!("12 operators, 0 violations, {witnesses} witnesses"))
}

fn banach_axioms() -> Check {
    let config = AxiomSuiteConfig { cases: 50, tol: 1e-9, ..AxiomSuiteConfig::default() };
    let report = banach_axiom_suite(estimate, &config);
    ensure!(report.errors.is_empty(), "estimator errors: {:?}", report.errors);
    ensure!(report.violations.is_empty(), "{} violations, first {:?}", report.violations.len(), report.violations[0]);
    let checked: usize = report.tallies.values().map(|t| t.checked).sum();
    Ok(format!("{} sequences, {checked} checks over {} axioms, 0 violations", report.cases, report.tallies.len()))
}

fn numerical_kernels() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    let mut worst_sqrt = 0.0f64;
    let mut worst_polar = 0.0f64;
    for case in 0..100 {
        let dim = rng.gen_range(1..=64);
        let rank = if rng.gen_bool(0.3) { rng.gen_range(1..=dim) } else { dim };
        let g = gaussian_rect(&mut rng, dim, rank).scale(10f64.powf(rng.gen_range(-3.0..3.0)));
        let a = PsdMatrix::from_matrix(g.matmul(&g.adjoint())).map_err(err("psd"))?;
        let r = psd_sqrt(&a).map_err(err(&format!("sqrt, case {case}")))?;
        let rel = norm_of(&r.matrix().matmul(r.matrix()).sub(a.matrix())) / norm_of(a.matrix());
        ensure!(rel <= 1e-9, "sqrt case {case} (dim {dim}): residual {rel:e}");
        worst_sqrt = worst_sqrt.max(rel);
    }
    for case in 0..100 {
        let dim = rng.gen_range(1..=64);
        let mut w = gaussian_matrix(&mut rng, dim);
        if rng.gen_bool(0.3) && dim > 1 {
            // rank deficient: repeat a column
            for i in 0..dim {
                w[(i, dim - 1)] = w[(i, 0)];
            }
        }
        let (u, p) = polar_decompose(&w).map_err(err(&format!("polar, case {case}")))?;
        let rel = norm_of(&u.matmul(p.matrix()).sub(&w)) / norm_of(&w);
        ensure!(rel <= 1e-9, "polar case {case} (dim {dim}): residual {rel:e}");
        worst_polar = worst_polar.max(rel);
    }
    Ok(format!("worst sqrt residual {worst_sqrt:.1e}, worst polar residual {worst_polar:.1e}"))
}

fn main() -> ExitCode {
    let ensemble = contraction_ensemble();
    let criteria: Vec<(&str, u64, Box<dyn Fn() -> Check + '_>)> = vec![
        ("beta-shift envelopes", 1, Box::new(beta_shift_envelopes)),
        ("jordan plus identity", 1, Box::new(jordan_plus_identity_example)),
        ("contraction limits", 30, Box::new(|| contraction_limits(&ensemble))),
        ("Cesaro vs contraction limit", 30, Box::new(|| cesaro_matches_contraction_limit(&ensemble))),
        ("unitarization", 20, Box::new(nagy_unitarization_suite)),
        ("Lorentz envelopes", 10, Box::new(lorentz_envelopes)),
        ("Q = A_phi certificates", 20, Box::new(quasinormal_certificates)),
        ("classification lattice", 30, Box::new(classification_lattice)),
        ("Banach-limit axioms", 10, Box::new(banach_axioms)),
        ("square root and polar", 10, Box::new(numerical_kernels)),
    ];
    let mut failed = 0;
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > Duration::from_secs(*budget) => {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget} s"))
            }
            other => other,
        };
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{elapsed:.2?}]", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
