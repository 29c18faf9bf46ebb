//! Similarity witnesses: the inner product `⟨x; y⟩_A = ⟨Ax; y⟩`, its norm
//! equivalence constants, and the conjugation `S T S⁻¹` with `S = A^{1/2}`
//! that turns an `A`-isometry into an isometry (or, for `A = Q`, an
//! invertible doubly power bounded operator into a unitary one).


use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::asymptotics::{cesaro_asymptotic_limit, classify, AsymptoticsError, Verdict, DEFAULT_CESARO_HORIZON};
use crate::ensemble::gaussian_vector;
use crate::linalg::{hermitian_eig, invert, operator_norm, psd_sqrt, vec_norm, ComplexMatrix, LinalgError, PsdMatrix};
use crate::models::{ModelError, OperatorModel, SupportedVector};
use crate::spec::serialize_matrix;

/// `λ_min > STRICT_TOL·‖A‖` separates `A ≻ O` from `A ≥ O`.
pub const STRICT_TOL: f64 = 1e-8;
/// Largest condition number accepted for `S`.
pub const COND_LIMIT: f64 = 1e8;
pub const WITNESS_TOL: f64 = 1e-6;
/// Unitarization residuals above `WITNESS_TOL` but at most this are
/// returned with a warning instead of rejected.
pub const DEGRADED_LIMIT: f64 = 1e-3;
pub const WITNESS_PROBES: usize = 200;
const PROBE_SEED: u64 = 0x5eed;
const CLASSIFY_TOL: f64 = 1e-8;

/// Which operator failed the power-boundedness precondition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Operand {
    Operator,
    Inverse,
}

impl std::fmt::Display for Operand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Operand::Operator => "T",
            Operand::Inverse => "T^-1",
        })
    }
}

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("{variant} model has no dense matrix")]
    NotDense { variant: &'static str },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not strictly positive: min eigenvalue {min_eigenvalue:e} <= {threshold:e}")]
    NotStrictlyPositive { min_eigenvalue: f64, threshold: f64 },
    #[error("T*AT != A: residual {residual:e} exceeds {tolerance:e}")]
    NotAnAIsometry { residual: f64, tolerance: f64 },
    #[error("singular operator: sigma_min {sigma_min:e}, sigma_max {sigma_max:e}")]
    Singular { sigma_min: f64, sigma_max: f64 },
    #[error("{operand} is not power bounded (growth ratio {growth})")]
    NotPowerBounded { operand: Operand, growth: f64 },
    #[error("witness residual {residual:e} is above {tolerance:e}; returned with a warning")]
    WitnessDegraded { witness: Box<SimilarityWitness>, residual: f64, tolerance: f64 },
    #[error("witness residual {residual:e} exceeds {limit:e}")]
    ResidualTooLarge { residual: f64, limit: f64 },
    #[error(transparent)]
    Linalg(LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
}

impl From<LinalgError> for WitnessError {
    fn from(e: LinalgError) -> Self {
        match e {
            LinalgError::Singular { sigma_min, sigma_max } => WitnessError::Singular { sigma_min, sigma_max },
            e => WitnessError::Linalg(e),
        }
    }
}

fn dense(t: &OperatorModel) -> Result<&ComplexMatrix, WitnessError> {
    match t {
        OperatorModel::Dense(m) => Ok(m),
        other => Err(WitnessError::NotDense { variant: other.variant_name() }),
    }
}

fn check_dim(expected: usize, found: usize) -> Result<(), WitnessError> {
    if expected != found {
        return Err(WitnessError::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn dense_vector(x: &SupportedVector, dim: usize) -> Result<Vec<Complex64>, WitnessError> {
    x.to_dense(dim).ok_or(WitnessError::DimensionMismatch { expected: dim, found: x.max_index().map_or(0, |i| i + 1) })
}

/// `⟨Ax; y⟩`.
pub fn new_inner_product(a: &PsdMatrix, x: &SupportedVector, y: &SupportedVector) -> Result<Complex64, WitnessError> {
    let dim = a.dim();
    let ax = a.matrix().mul_vec(&dense_vector(x, dim)?);
    let y = dense_vector(y, dim)?;
    Ok(ax.iter().zip(&y).map(|(p, q)| p * q.conj()).sum())
}

/// `(λ_min(A), ‖A‖)`, the tight constants in
/// `λ_min‖x‖² ≤ ‖x‖_A² ≤ ‖A‖‖x‖²`, when `λ_min > STRICT_TOL·‖A‖`.
pub fn norm_equivalence_constants(a: &PsdMatrix) -> Result<(f64, f64), WitnessError> {
    let eig = hermitian_eig(a.hermitian())?;
    let upper = eig.max_eigenvalue().max(0.0);
    let lower = eig.min_eigenvalue();
    let threshold = STRICT_TOL * upper;
    if !(lower > threshold) {
        return Err(WitnessError::NotStrictlyPositive { min_eigenvalue: lower, threshold });
    }
    Ok((lower, upper))
}

fn serialize_psd<S: Serializer>(a: &PsdMatrix, s: S) -> Result<S::Ok, S::Error> {
    serialize_matrix(a.matrix(), s)
}

/// The inner product `⟨·;·⟩_A` with its positivity verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerProductWitness {
    #[serde(serialize_with = "serialize_psd")]
    pub gram: PsdMatrix,
    /// measure: `λ_min(A)`; holds if `> threshold = STRICT_TOL·‖A‖`.
    pub strictly_positive: Verdict,
    /// `(λ_min, ‖A‖)`; the lower constant is only useful when strictly positive.
    pub equivalence_constants: (f64, f64),
}

pub fn inner_product_witness(a: &PsdMatrix) -> Result<InnerProductWitness, WitnessError> {
    let eig = hermitian_eig(a.hermitian())?;
    let upper = eig.max_eigenvalue().max(0.0);
    let lower = eig.min_eigenvalue().max(0.0);
    let threshold = STRICT_TOL * upper;
    Ok(InnerProductWitness {
        gram: a.clone(),
        strictly_positive: Verdict { holds: lower > threshold, measure: lower, threshold },
        equivalence_constants: (lower, upper),
    })
}

/// `‖T*AT − A‖ / max(‖A‖, 1)`.
pub fn a_isometry_residual(t: &OperatorModel, a: &PsdMatrix) -> Result<f64, WitnessError> {
    let m = dense(t)?;
    check_dim(m.rows(), a.dim())?;
    let d = m.congruence(a.matrix()).sub(a.matrix());
    if d.max_abs() == 0.0 {
        return Ok(0.0);
    }
    let scale = if a.matrix().max_abs() == 0.0 { 1.0 } else { operator_norm(a.matrix())?.max(1.0) };
    Ok(operator_norm(&d)? / scale)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimilarityWitness {
    #[serde(serialize_with = "serialize_matrix")]
    pub s: ComplexMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub s_inverse: ComplexMatrix,
    /// `S T S⁻¹`.
    #[serde(serialize_with = "serialize_matrix")]
    pub conjugated: ComplexMatrix,
    /// `max |‖Ux‖ − ‖x‖| / ‖x‖` over the seeded probe vectors.
    pub isometry_residual: f64,
    /// `‖U*U − I‖`.
    pub gram_residual: f64,
    /// `max(‖U*U − I‖, ‖UU* − I‖)` when a unitary is claimed.
    pub unitary_residual: Option<f64>,
    /// `‖S S⁻¹ − I‖`.
    pub inverse_residual: f64,
    pub condition: f64,
    /// `‖T*AT − A‖ / max(‖A‖, 1)` for the `A` the witness was built from.
    pub fixed_point_residual: f64,
    pub tolerance: f64,
}

fn probe_residual(u: &ComplexMatrix) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
    (0..WITNESS_PROBES)
        .map(|_| {
            let x = gaussian_vector(&mut rng, u.rows());
            let nx = vec_norm(&x);
            (vec_norm(&u.mul_vec(&x)) - nx).abs() / nx
        })
        .fold(0.0, f64::max)
}

fn identity_defect(m: &ComplexMatrix) -> Result<f64, WitnessError> {
    let d = m.sub(&ComplexMatrix::identity(m.rows()));
    Ok(if d.max_abs() == 0.0 { 0.0 } else { operator_norm(&d)? })
}

fn conjugate(m: &ComplexMatrix, a: &PsdMatrix, fixed_point_residual: f64) -> Result<SimilarityWitness, WitnessError> {
    let s = psd_sqrt(a)?.matrix().clone();
    let inv = invert(&s, COND_LIMIT)?;
    let u = s.matmul(m).matmul(&inv.matrix);
    let inverse_residual = identity_defect(&s.matmul(&inv.matrix))?;
    let gram_residual = identity_defect(&u.adjoint().matmul(&u))?;
    Ok(SimilarityWitness {
        isometry_residual: probe_residual(&u),
        gram_residual,
        unitary_residual: None,
        inverse_residual,
        condition: inv.condition,
        fixed_point_residual,
        tolerance: WITNESS_TOL,
        s,
        s_inverse: inv.matrix,
        conjugated: u,
    })
}

/// `S = A^{1/2}` and `U = S T S⁻¹` for `A ≻ O` with `T*AT = A`; then
/// `‖Ux‖² = ⟨A T S⁻¹x; T S⁻¹x⟩ = ⟨A S⁻¹x; S⁻¹x⟩ = ‖x‖²`. The result is
/// checked on seeded probes and through `‖U*U − I‖`, both against `1e-6`.
pub fn isometry_witness(t: &OperatorModel, a: &PsdMatrix) -> Result<SimilarityWitness, WitnessError> {
    let m = dense(t)?;
    check_dim(m.rows(), a.dim())?;
    norm_equivalence_constants(a)?;
    let residual = a_isometry_residual(t, a)?;
    if residual > WITNESS_TOL {
        return Err(WitnessError::NotAnAIsometry { residual, tolerance: WITNESS_TOL });
    }
    let w = conjugate(m, a, residual)?;
    let worst = w.isometry_residual.max(w.gram_residual);
    if worst > WITNESS_TOL {
        return Err(WitnessError::ResidualTooLarge { residual: worst, limit: WITNESS_TOL });
    }
    Ok(w)
}

/// Unitary `Q^{1/2} T Q^{−1/2}` for an invertible `T` with `T` and `T⁻¹`
/// power bounded, where `Q` is the Cesàro asymptotic limit of `T`
/// (computed with stop tolerance `tol`). Both `T` and `T⁻¹` are classified
/// at horizon `n_max` first.
///
/// A unitary residual in `(1e-6, 1e-3]` comes back as `WitnessDegraded`
/// carrying the witness.
pub fn nagy_unitarization(t: &OperatorModel, n_max: usize, tol: f64) -> Result<SimilarityWitness, WitnessError> {
    let m = dense(t)?;
    let inv = invert(m, f64::INFINITY)?;
    let operands = [(Operand::Operator, t.clone()), (Operand::Inverse, OperatorModel::dense(inv.matrix)?)];
    for (operand, op) in &operands {
        let report = classify(op, n_max, CLASSIFY_TOL)?;
        if !report.power_bounded.holds {
            return Err(WitnessError::NotPowerBounded { operand: *operand, growth: report.power_bounded.measure });
        }
    }
    let q = cesaro_asymptotic_limit(t, tol, DEFAULT_CESARO_HORIZON)?.limit;
    norm_equivalence_constants(&q)?;
    let fixed_point = a_isometry_residual(t, &q)?;
    let mut w = conjugate(m, &q, fixed_point)?;
    let u = &w.conjugated;
    let residual = identity_defect(&u.adjoint().matmul(u))?.max(identity_defect(&u.matmul(&u.adjoint()))?);
    w.unitary_residual = Some(residual);
    if residual <= WITNESS_TOL {
        Ok(w)
    } else if residual <= DEGRADED_LIMIT {
        Err(WitnessError::WitnessDegraded { witness: Box::new(w), residual, tolerance: WITNESS_TOL })
    } else {
        Err(WitnessError::ResidualTooLarge { residual, limit: DEGRADED_LIMIT })
    }
}
