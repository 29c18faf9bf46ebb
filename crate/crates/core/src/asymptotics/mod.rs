//! Power Grams `Mₙ = T*ⁿTⁿ`, Cesàro means `Qₙ`, their limits and the
//! classification of an operator by the growth of its powers.

mod averaging;
mod classify;
mod items;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{
    hermitian_eig, invert, operator_norm, vec_norm, ComplexMatrix, HermitianMatrix, LinalgError, PsdMatrix,
    SINGULAR_REL_TOL,
};
use crate::models::{orbit_norms, ModelError, OperatorModel, SupportedVector};
use crate::summation::compensated_mean;

pub(crate) use averaging::Doubling;
pub use classify::{classify, classify_with_probes, ClassificationReport, Verdict, DEFAULT_CLASSIFY_HORIZON};
pub use items::{verify_theorem_items, ItemCheck, ItemSet, ITEM_TOL};

pub const DEFAULT_TOL: f64 = 1e-8;
/// Default horizon for the Cesàro limit (`N = 2²⁴`).
pub const DEFAULT_CESARO_HORIZON: usize = 1 << 24;
/// Default horizon for the power Grams of a contraction.
pub const DEFAULT_GRAM_HORIZON: usize = 1 << 12;
/// Norms beyond this count as divergence.
pub const DIVERGENCE_NORM: f64 = 1e12;
/// Contraction precondition slack on `‖T‖`.
pub const CONTRACTION_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone)]
pub enum AsymptoticsError {
    #[error("operation needs a finite-dimensional model, got {variant}")]
    NotDense { variant: &'static str },
    #[error("not a contraction: ||T|| = {norm}")]
    NotAContraction { norm: f64 },
    #[error("T*^n T^n did not settle by n = {}; last delta {:e}", .partial.iterations, .partial.final_delta)]
    SlowConvergence { partial: Box<AsymptoticReport> },
    #[error("power Gram overflow at n = {n}: norm {norm:e}")]
    Overflow { n: usize, norm: f64 },
    #[error("Cesaro means diverge: ||Q_n|| = {norm:e} at n = {n}")]
    Divergent { n: usize, norm: f64 },
    #[error("Cesaro means oscillate: doubled-index deltas stopped decreasing by n = {}", .partial.iterations)]
    Oscillating { partial: Box<AsymptoticReport> },
    #[error("Cesaro means not settled by n = {}; last delta {:e}", .partial.iterations, .partial.final_delta)]
    NotConverged { partial: Box<AsymptoticReport> },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub(crate) fn dense_of(t: &OperatorModel) -> Result<ComplexMatrix, AsymptoticsError> {
    t.to_dense().ok_or(AsymptoticsError::NotDense { variant: t.variant_name() })
}

fn hermitian(m: ComplexMatrix) -> Result<HermitianMatrix, AsymptoticsError> {
    Ok(HermitianMatrix::new(m)?)
}

/// `M₀ = I, M_{n+1} = T* Mₙ T`.
#[derive(Clone, Debug)]
pub struct PowerGramSequence {
    pub operator: ComplexMatrix,
    pub grams: Vec<HermitianMatrix>,
    pub n_current: usize,
}

impl PowerGramSequence {
    pub fn gram(&self, n: usize) -> &HermitianMatrix {
        &self.grams[n]
    }

    pub fn psd(&self, n: usize) -> Result<PsdMatrix, LinalgError> {
        PsdMatrix::new(self.grams[n].clone())
    }

    /// Smallest eigenvalue of `Mₙ − M_{n+1}`; non-negative for contractions.
    pub fn monotonicity_margin(&self, n: usize) -> Result<f64, LinalgError> {
        let d = HermitianMatrix::new(self.grams[n].matrix().sub(self.grams[n + 1].matrix()))?;
        Ok(hermitian_eig(&d)?.min_eigenvalue())
    }
}

pub fn power_grams(t: &OperatorModel, n_max: usize) -> Result<PowerGramSequence, AsymptoticsError> {
    let m = dense_of(t)?;
    let dim = m.rows();
    let mut grams = Vec::with_capacity(n_max + 1);
    grams.push(HermitianMatrix::identity(dim));
    for n in 1..=n_max {
        let next = m.congruence(grams[n - 1].matrix());
        let norm = next.frobenius_norm();
        if !next.is_finite() || norm > DIVERGENCE_NORM {
            return Err(AsymptoticsError::Overflow { n, norm });
        }
        grams.push(hermitian(next)?);
    }
    Ok(PowerGramSequence { operator: m, grams, n_current: n_max })
}

/// Running Cesàro mean `Qₙ = (1/n) Σ_{k<n} T*ᵏTᵏ`, updated one term at a time.
#[derive(Clone, Debug)]
pub struct CesaroState {
    t: ComplexMatrix,
    gram: ComplexMatrix,
    q: ComplexMatrix,
    n: usize,
    last_delta: f64,
    reference: Option<ComplexMatrix>,
    history: Vec<f64>,
}

impl CesaroState {
    /// Starts at `Q₁ = I`.
    pub fn new(t: &ComplexMatrix) -> Self {
        let dim = t.rows();
        CesaroState {
            t: t.clone(),
            gram: t.congruence(&ComplexMatrix::identity(dim)),
            q: ComplexMatrix::identity(dim),
            n: 1,
            last_delta: 0.0,
            reference: None,
            history: Vec::new(),
        }
    }

    /// Records `‖Qₙ − reference‖_F` after every step, starting with `Q₁`.
    pub fn with_reference(mut self, reference: &ComplexMatrix) -> Self {
        self.history = vec![self.q.sub(reference).frobenius_norm()];
        self.reference = Some(reference.clone());
        self
    }

    fn next_q(&self) -> ComplexMatrix {
        let n = self.n as f64;
        self.q.scale(n / (n + 1.0)).add(&self.gram.scale(1.0 / (n + 1.0)))
    }

    /// `Q_{n+1} = (n/(n+1)) Qₙ + Mₙ/(n+1)`.
    pub fn step(&mut self) {
        let next = averaging::hermitian_part(&self.next_q());
        self.last_delta = next.sub(&self.q).frobenius_norm();
        self.q = next;
        self.gram = averaging::hermitian_part(&self.t.congruence(&self.gram));
        self.n += 1;
        if let Some(r) = &self.reference {
            self.history.push(self.q.sub(r).frobenius_norm());
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> &ComplexMatrix {
        &self.q
    }

    pub fn q_psd(&self) -> Result<PsdMatrix, LinalgError> {
        PsdMatrix::from_matrix(self.q.clone())
    }

    /// `‖Mₙ‖_F` for the next term to be averaged.
    pub fn gram_norm(&self) -> f64 {
        self.gram.frobenius_norm()
    }

    pub fn last_delta(&self) -> f64 {
        self.last_delta
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// `‖T*QₙT − Q_{n+1} − (Q_{n+1} − I)/n‖_F`, zero up to rounding.
    pub fn recurrence_residual(&self) -> f64 {
        let next = self.next_q();
        let dim = self.q.rows();
        let lhs = self.t.congruence(&self.q);
        let rhs = next.add(&next.sub(&ComplexMatrix::identity(dim)).scale(1.0 / self.n as f64));
        lhs.sub(&rhs).frobenius_norm()
    }

    pub fn trace(&self) -> f64 {
        self.q.trace().re
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    /// Strong limit of `T*ⁿTⁿ` for a contraction.
    Contraction,
    /// Limit of the Cesàro means `Qₙ`.
    Cesaro,
}

/// One row of a convergence trace at index `n = 2^level`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TracePoint {
    pub n: usize,
    /// Frobenius distance to the previous estimate.
    pub delta: f64,
    /// Frobenius distance between the raw iterates at `n` and `n/2`.
    pub raw_delta: f64,
    /// Frobenius norm of the raw iterate at `n`.
    pub norm: f64,
    /// `‖T* L T − L‖_F` for the current estimate `L`.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct AsymptoticReport {
    pub kind: LimitKind,
    pub limit: PsdMatrix,
    /// Largest power index `n` reached.
    pub iterations: usize,
    pub final_delta: f64,
    /// `‖T* L T − L‖` in operator norm.
    pub intertwining_residual: f64,
    pub tolerance: f64,
    pub item_checks: BTreeMap<String, ItemCheck>,
    pub trace: Vec<TracePoint>,
}

impl AsymptoticReport {
    /// `log₂` of `iterations`.
    pub fn levels(&self) -> usize {
        self.iterations.max(1).trailing_zeros() as usize
    }
}

fn report(
    kind: LimitKind,
    t: &ComplexMatrix,
    limit: ComplexMatrix,
    iterations: usize,
    final_delta: f64,
    tolerance: f64,
    trace: Vec<TracePoint>,
) -> Result<AsymptoticReport, AsymptoticsError> {
    let limit = PsdMatrix::from_matrix(limit)?;
    let intertwining_residual = intertwining_residual_dense(t, limit.hermitian())?;
    Ok(AsymptoticReport {
        kind,
        limit,
        iterations,
        final_delta,
        intertwining_residual,
        tolerance,
        item_checks: BTreeMap::new(),
        trace,
    })
}

/// Strong limit `A` of `T*ⁿTⁿ` for a contraction. Grams are compared at
/// doubled indices `n` and `2n`; monotonicity makes this dominate
/// `‖Mₙ − M_{n+1}‖`. Stops after two consecutive doublings within `tol`.
pub fn contraction_asymptotic_limit(
    t: &OperatorModel,
    tol: f64,
    n_max: usize,
) -> Result<AsymptoticReport, AsymptoticsError> {
    let m = dense_of(t)?;
    let norm = operator_norm(&m)?;
    if norm > 1.0 + CONTRACTION_SLACK {
        return Err(AsymptoticsError::NotAContraction { norm });
    }
    let mut doubling = Doubling::new(&m);
    let mut cur = averaging::hermitian_part(&m.congruence(&ComplexMatrix::identity(m.rows())));
    let mut n = 1usize;
    let mut hits = 0;
    let mut trace = Vec::new();
    loop {
        let level = n.trailing_zeros() as usize;
        let p = doubling.power(level);
        let next = averaging::hermitian_part(&p.congruence(&cur));
        let delta = next.sub(&cur).frobenius_norm();
        cur = next;
        n *= 2;
        let step = m.congruence(&cur).sub(&cur).frobenius_norm();
        trace.push(TracePoint { n, delta, raw_delta: delta, norm: cur.frobenius_norm(), residual: step });
        hits = if delta <= tol { hits + 1 } else { 0 };
        if hits >= 2 {
            return report(LimitKind::Contraction, &m, cur, n, step, tol, trace);
        }
        if n.saturating_mul(2) > n_max.max(2) {
            let partial = report(LimitKind::Contraction, &m, cur, n, step, tol, trace)?;
            return Err(AsymptoticsError::SlowConvergence { partial: Box::new(partial) });
        }
    }
}

/// Number of trailing doublings inspected by the oscillation rule.
const OSCILLATION_WINDOW: usize = 4;
/// Oscillation is only declared from this level on.
const OSCILLATION_MIN_LEVEL: usize = 10;

fn oscillating(trace: &[TracePoint], tol: f64) -> bool {
    if trace.len() < OSCILLATION_WINDOW + 1 {
        return false;
    }
    let w = &trace[trace.len() - OSCILLATION_WINDOW - 1..];
    if w[0].n < (1 << OSCILLATION_MIN_LEVEL) {
        return false;
    }
    let flat = w.windows(2).all(|p| p[1].delta >= 0.9 * p[0].delta && p[1].delta > tol);
    let bounded_growth = w.last().unwrap().delta <= 4.0 * w[1].delta;
    let norms_bounded = w.last().unwrap().norm <= 1.1 * w[0].norm;
    flat && bounded_growth && norms_bounded
}

/// Cesàro asymptotic limit `Q = lim Qₙ` at doubled indices `N = 2^K`.
///
/// Each level evaluates `E_K = T*ᴺ S_N³(I) Tᴺ` where `S_N(Y)` is the Cesàro
/// average of `T*ᵏ Y Tᵏ` over `k < N` (so `S_N(I) = Q_N`). `E_K` has the same
/// limit as `Q_N` with error `O(N⁻³)` instead of `O(1/N)`. The run stops once
/// two consecutive levels satisfy `‖E_K − E_{K−1}‖_F ≤ tol` and
/// `‖T*E_K T − E_K‖_F ≤ 10·tol`.
pub fn cesaro_asymptotic_limit(
    t: &OperatorModel,
    tol: f64,
    n_max: usize,
) -> Result<AsymptoticReport, AsymptoticsError> {
    let m = dense_of(t)?;
    let dim = m.rows();
    let identity = ComplexMatrix::identity(dim);
    let max_level = (usize::BITS - 1 - n_max.max(2).leading_zeros()) as usize;
    let mut doubling = Doubling::new(&m);
    let mut prev: Option<(ComplexMatrix, ComplexMatrix)> = None;
    let mut hits = 0;
    let mut trace = Vec::new();
    for level in 1..=max_level {
        let n = 1usize << level;
        let finite = doubling.finite_through(level);
        let q_n = doubling.average(&identity, level);
        let norm = q_n.frobenius_norm();
        if !finite || !q_n.is_finite() || norm > DIVERGENCE_NORM {
            return Err(AsymptoticsError::Divergent { n, norm });
        }
        let mut e = q_n.clone();
        for _ in 0..2 {
            e = doubling.average(&e, level);
        }
        let e = averaging::hermitian_part(&doubling.power(level).congruence(&e));
        if !e.is_finite() {
            return Err(AsymptoticsError::Divergent { n, norm: f64::INFINITY });
        }
        let residual = m.congruence(&e).sub(&e).frobenius_norm();
        let (delta, raw_delta) = match &prev {
            Some((pe, pq)) => (e.sub(pe).frobenius_norm(), q_n.sub(pq).frobenius_norm()),
            None => (f64::INFINITY, f64::INFINITY),
        };
        trace.push(TracePoint { n, delta, raw_delta, norm, residual });
        hits = if delta <= tol && residual <= 10.0 * tol { hits + 1 } else { 0 };
        if hits >= 2 {
            return report(LimitKind::Cesaro, &m, e, n, delta, tol, trace);
        }
        if oscillating(&trace, tol) {
            let partial = report(LimitKind::Cesaro, &m, e, n, delta, tol, trace)?;
            return Err(AsymptoticsError::Oscillating { partial: Box::new(partial) });
        }
        if level == max_level {
            let partial = report(LimitKind::Cesaro, &m, e, n, delta, tol, trace)?;
            return Err(AsymptoticsError::NotConverged { partial: Box::new(partial) });
        }
        prev = Some((e, q_n));
    }
    unreachable!("loop returns at max_level")
}

/// `(1/n) Σ_{k<n} ‖T^{k+j} x‖²`, exact on every model; `0` when `n = 0`.
pub fn cesaro_quadratic_form(
    t: &OperatorModel,
    x: &SupportedVector,
    n: usize,
    j: usize,
) -> Result<f64, AsymptoticsError> {
    if n == 0 {
        return Ok(0.0);
    }
    let orbit = orbit_norms(t, x, j + n - 1)?;
    Ok(compensated_mean(&orbit[j..j + n]))
}

fn intertwining_residual_dense(t: &ComplexMatrix, a: &HermitianMatrix) -> Result<f64, AsymptoticsError> {
    if t.rows() != a.dim() {
        return Err(AsymptoticsError::DimensionMismatch { expected: t.rows(), found: a.dim() });
    }
    let d = t.congruence(a.matrix()).sub(a.matrix());
    if d.max_abs() == 0.0 {
        return Ok(0.0);
    }
    Ok(operator_norm(&d)?)
}

/// `‖T*AT − A‖` in operator norm.
pub fn intertwining_residual(t: &OperatorModel, a: &HermitianMatrix) -> Result<f64, AsymptoticsError> {
    intertwining_residual_dense(&dense_of(t)?, a)
}

/// Indices at which orbits are sampled by the kernel cross-check.
pub const KERNEL_SAMPLES: [usize; 3] = [64, 128, 256];

/// Orbit decay test on `‖Tⁿx‖` at `n = 64, 128, 256`: either tiny at the end,
/// or halved between the first and last sample.
pub(crate) fn decays(r: [f64; 3], x_norm: f64) -> bool {
    r[2] <= 1e-6 * x_norm || r[2] <= 0.5 * r[0]
}

#[derive(Clone, Debug)]
pub struct KernelReport {
    /// Orthonormal basis of the numerical kernel, as column vectors.
    pub basis: Vec<Vec<Complex64>>,
    /// Eigenvalues on the complement.
    pub complement_eigenvalues: Vec<f64>,
    /// `‖Tⁿv‖` at `KERNEL_SAMPLES` for each kernel vector.
    pub kernel_orbits: Vec<[f64; 3]>,
    /// The same for each complement eigenvector.
    pub complement_orbits: Vec<[f64; 3]>,
    /// Kernel orbits decay and complement orbits do not.
    pub cross_check: bool,
}

/// Numerical kernel of `a` (eigenvalues `≤ tol·max(‖a‖, 1)`), cross-checked against
/// orbit decay under `t`.
pub fn kernel_of_limit(a: &PsdMatrix, t: &OperatorModel, tol: f64) -> Result<KernelReport, AsymptoticsError> {
    let m = dense_of(t)?;
    if m.rows() != a.dim() {
        return Err(AsymptoticsError::DimensionMismatch { expected: m.rows(), found: a.dim() });
    }
    let eig = hermitian_eig(a.hermitian())?;
    // a nonzero asymptotic limit has norm at least one, so a uniformly tiny
    // `a` is rounding around the zero limit
    let scale = eig.max_eigenvalue().max(1.0);
    let p64 = m.pow(KERNEL_SAMPLES[0] as u64);
    let p128 = p64.matmul(&p64);
    let p256 = p128.matmul(&p128);
    let orbit = |v: &[Complex64]| [vec_norm(&p64.mul_vec(v)), vec_norm(&p128.mul_vec(v)), vec_norm(&p256.mul_vec(v))];
    let mut out = KernelReport {
        basis: Vec::new(),
        complement_eigenvalues: Vec::new(),
        kernel_orbits: Vec::new(),
        complement_orbits: Vec::new(),
        cross_check: true,
    };
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let r = orbit(&v);
        if lam <= tol * scale {
            out.cross_check &= decays(r, 1.0);
            out.basis.push(v);
            out.kernel_orbits.push(r);
        } else {
            out.cross_check &= !decays(r, 1.0);
            out.complement_eigenvalues.push(lam);
            out.complement_orbits.push(r);
        }
    }
    Ok(out)
}

/// `(min_n σ_min(Qₙᴿ), max_n ‖Qₙᴿ‖)` over `1 ≤ n ≤ n_max`, where
/// `Qₙᴿ = (1/n) Σ_{k<n} T*ᵏR*RTᵏ` and `R` defaults to `I`.
pub fn cesaro_power_bounds(
    t: &OperatorModel,
    r: Option<&ComplexMatrix>,
    n_max: usize,
) -> Result<(f64, f64), AsymptoticsError> {
    let m = dense_of(t)?;
    let dim = m.rows();
    let y = match r {
        Some(r) => {
            if r.rows() != dim || r.cols() != dim {
                return Err(AsymptoticsError::DimensionMismatch { expected: dim, found: r.rows() });
            }
            invert(r, 1.0 / SINGULAR_REL_TOL)?;
            r.congruence(&ComplexMatrix::identity(dim))
        }
        None => ComplexMatrix::identity(dim),
    };
    let mut term = y;
    let mut sum = ComplexMatrix::zeros(dim, dim);
    let mut alpha = f64::INFINITY;
    let mut beta = 0.0f64;
    for n in 1..=n_max.max(1) {
        sum = sum.add(&term);
        let e = hermitian_eig(&HermitianMatrix::new(sum.scale(1.0 / n as f64))?)?;
        alpha = alpha.min(e.min_eigenvalue().max(0.0));
        beta = beta.max(e.max_eigenvalue());
        term = averaging::hermitian_part(&m.congruence(&term));
    }
    Ok((alpha, beta))
}

#[cfg(test)]
mod tests;
