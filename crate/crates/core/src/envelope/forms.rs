use num_complex::Complex64;
use serde::{Serialize, Serializer};

use super::{
    default_grid, envelope_with_noise, BoundedSequence, EnvelopeError, EnvelopeEstimate, DEFAULT_ENVELOPE_TOL,
    NOISE_FLOOR,
};
use crate::asymptotics::Verdict;
use crate::linalg::{hermitian_eig, ComplexMatrix, HermitianMatrix};
use crate::models::{is_quasinormal, orbit_inner_products, orbit_norms, OperatorModel, SupportedVector};
use crate::spec::matrix_to_pairs;

pub const DEFAULT_ORBIT_HORIZON: usize = 1 << 14;
/// An orbit that is non-decreasing over `[N/10, N]` and grows by more than
/// this relative amount is taken as evidence of power unboundedness.
const GROWTH_SLACK: f64 = 1e-6;
const QUASINORMAL_TOL: f64 = 1e-10;
/// Eigenvalues of `T*T` this close to 1 count as 1.
const UNIT_TOL: f64 = 1e-9;

fn orbit_sequence(t: &OperatorModel, x: &SupportedVector, horizon: usize) -> Result<Vec<f64>, EnvelopeError> {
    let orbit = orbit_norms(t, x, horizon)?;
    if let Some(k) = orbit.iter().position(|v| !v.is_finite()) {
        return Err(EnvelopeError::NotPowerBoundedEvidence { from: 0, to: k, growth: f64::INFINITY });
    }
    let from = horizon / 10;
    let growth = orbit[horizon] / orbit[from];
    if orbit[from..].windows(2).all(|w| w[1] >= w[0]) && growth > 1.0 + GROWTH_SLACK {
        return Err(EnvelopeError::NotPowerBoundedEvidence { from, to: horizon, growth });
    }
    Ok(orbit)
}

fn scaled_tol(orbit: &[f64]) -> f64 {
    DEFAULT_ENVELOPE_TOL * orbit.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Per-step relative rounding allowance of an orbit `‖Tⁿx‖²`; it grows
/// linearly with `n`.
const ORBIT_ROUNDING_PER_STEP: f64 = 8.0 * f64::EPSILON;

fn sweep(orbit: Vec<f64>, tol: f64) -> Result<EnvelopeEstimate, EnvelopeError> {
    let len = orbit.len();
    let noise = ORBIT_ROUNDING_PER_STEP * len as f64;
    envelope_with_noise(&BoundedSequence::from_sample(orbit)?, &default_grid(len), len, tol, noise)
}

/// Envelope of the orbit sequence `‖Tⁿx‖²`, `n = 0..=horizon`. Every
/// Banach limit `φ` gives `⟨A_φx; x⟩` inside `[φ₋, φ₊]`. The uniformity
/// tolerance is `1e-9` relative to the largest orbit value.
pub fn vector_envelope(
    t: &OperatorModel,
    x: &SupportedVector,
    horizon: usize,
) -> Result<EnvelopeEstimate, EnvelopeError> {
    let orbit = orbit_sequence(t, x, horizon)?;
    let tol = scaled_tol(&orbit);
    sweep(orbit, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiFormEntry {
    /// Index into the probe list.
    pub probe: usize,
    pub lower: f64,
    pub upper: f64,
    pub uniform: bool,
}

fn serialize_form<S: Serializer>(m: &Option<HermitianMatrix>, s: S) -> Result<S::Ok, S::Error> {
    m.as_ref().map(|h| matrix_to_pairs(h.matrix())).serialize(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiFormBounds {
    pub entries: Vec<PhiFormEntry>,
    /// `⟨A_φ x_j; x_i⟩` at `(i, j)` over the probes, present only when every
    /// polarization sequence has a uniform envelope.
    #[serde(serialize_with = "serialize_form")]
    pub reconstructed: Option<HermitianMatrix>,
    /// measure: worst deviation over the swept envelopes; holds when all
    /// envelopes collapsed uniformly, which forces `A_φ = Q` on the probes.
    pub certified_equal_to_q: Verdict,
}

/// Bounds `φ₋ ≤ ⟨A_φx; x⟩ ≤ φ₊` for each probe. When every diagonal and
/// every polarization sequence `‖Tⁿ(x_j + iᵏx_i)‖²` has a uniform envelope,
/// all Banach limits agree on them and the form is rebuilt from
/// `⟨A x_j; x_i⟩ = ¼ Σₖ iᵏ ⟨A(x_j + iᵏx_i); x_j + iᵏx_i⟩`. For the basis of a
/// finite-dimensional model this is the matrix of `A_φ`.
pub fn phi_asymptotic_form(
    t: &OperatorModel,
    probes: &[SupportedVector],
    horizon: usize,
) -> Result<PhiFormBounds, EnvelopeError> {
    if let Some(k) = probes.iter().position(|x| x.is_zero()) {
        return Err(EnvelopeError::InvalidSequence(format!("probe {k} is zero")));
    }
    let orbits: Vec<Vec<f64>> = probes.iter().map(|x| orbit_sequence(t, x, horizon)).collect::<Result<_, _>>()?;
    let tol = orbits.iter().map(|o| scaled_tol(o)).fold(DEFAULT_ENVELOPE_TOL, f64::max);
    let mut worst = 0.0f64;
    let mut entries = Vec::with_capacity(probes.len());
    let mut diagonal = Vec::with_capacity(probes.len());
    for (probe, orbit) in orbits.iter().enumerate() {
        let est = sweep(orbit.clone(), tol)?;
        worst = worst.max(est.deviation);
        entries.push(PhiFormEntry { probe, lower: est.phi_minus, upper: est.phi_plus, uniform: est.uniform });
        diagonal.push(est.midpoint());
    }
    let mut reconstructed = None;
    if entries.iter().all(|e| e.uniform) {
        let d = probes.len();
        let mut m = ComplexMatrix::zeros(d, d);
        let mut uniform = true;
        for i in 0..d {
            m[(i, i)] = Complex64::new(diagonal[i], 0.0);
            for j in i + 1..d {
                let c = orbit_inner_products(t, &probes[j], &probes[i], horizon)?;
                let mut phi = [0.0; 4];
                for (k, slot) in phi.iter_mut().enumerate() {
                    // ‖Tⁿ(x_j + iᵏx_i)‖² = a_j + a_i + 2 Re(conj(iᵏ) ⟨Tⁿx_j; Tⁿx_i⟩)
                    let rot = Complex64::i().powu(k as u32).conj();
                    let seq: Vec<f64> =
                        (0..=horizon).map(|n| orbits[j][n] + orbits[i][n] + 2.0 * (rot * c[n]).re).collect();
                    let est = sweep(seq, tol)?;
                    worst = worst.max(est.deviation);
                    uniform &= est.uniform;
                    *slot = est.midpoint();
                }
                let z = Complex64::new(phi[0] - phi[2], phi[1] - phi[3]) * 0.25;
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        if uniform {
            reconstructed = Some(HermitianMatrix::new(m)?);
        }
    }
    let certified_equal_to_q = Verdict { holds: reconstructed.is_some(), measure: worst, threshold: tol };
    Ok(PhiFormBounds { entries, reconstructed, certified_equal_to_q })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeCertificate {
    /// Supplied `⟨Qx; x⟩`.
    pub q_value: f64,
    /// `lim ‖Tⁿx‖²` (analytic path) or the final envelope midpoint (sweep).
    pub limit: f64,
    /// `supⱼ |(1/n) Σ_{k<n} ‖T^{k+j}x‖² − ⟨Qx; x⟩|` at the largest window.
    pub deviation: f64,
    /// `(n, deviation)` along the window grid; empty on the analytic path.
    pub trend: Vec<(usize, f64)>,
}

/// Evidence for `Q = A_φ` for every Banach limit `φ`, on a probe set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QCertificate {
    pub certified: bool,
    /// Decided from quasinormality instead of an orbit sweep.
    pub analytic: bool,
    pub worst_deviation: f64,
    pub tolerance: f64,
    pub probes: Vec<ProbeCertificate>,
}

fn check_lengths(q_form: &[f64], probes: &[SupportedVector]) -> Result<(), EnvelopeError> {
    if q_form.len() != probes.len() {
        return Err(EnvelopeError::DimensionMismatch { expected: probes.len(), found: q_form.len() });
    }
    Ok(())
}

fn certificate(per_probe: Vec<ProbeCertificate>, tol: f64, analytic: bool) -> QCertificate {
    let worst = per_probe.iter().map(|p| p.deviation).fold(0.0, f64::max);
    QCertificate { certified: worst <= tol, analytic, worst_deviation: worst, tolerance: tol, probes: per_probe }
}

/// `lim ‖Tⁿx‖²` for a quasinormal `T`, or `None` when the model is not
/// quasinormal or has no closed form here. Quasinormality gives
/// `‖Tⁿx‖² = ⟨(T*T)ⁿx; x⟩`, so the limit is the form of the spectral
/// projection of `T*T` at 1 (infinite when `‖T‖ > 1`).
fn quasinormal_limits(t: &OperatorModel, probes: &[SupportedVector]) -> Result<Option<Vec<f64>>, EnvelopeError> {
    if !is_quasinormal(t, QUASINORMAL_TOL)?.quasinormal {
        return Ok(None);
    }
    let unit = |r: f64| -> f64 {
        if r > 1.0 + UNIT_TOL {
            f64::INFINITY
        } else if r >= 1.0 - UNIT_TOL {
            1.0
        } else {
            0.0
        }
    };
    let limits = match t {
        OperatorModel::Diagonal(d) => {
            probes.iter().map(|x| x.iter().map(|(i, a)| a.norm_sqr() * unit(d.entry(i).norm_sqr())).sum()).collect()
        }
        OperatorModel::WeightedShift(w) => {
            let f = unit(w.weight(1) * w.weight(1));
            probes.iter().map(|x| x.norm_sqr() * f).collect()
        }
        _ => {
            let Some(m) = t.to_dense() else { return Ok(None) };
            let g = HermitianMatrix::new(m.adjoint().matmul(&m))?;
            let eig = hermitian_eig(&g)?;
            if eig.max_eigenvalue() > 1.0 + UNIT_TOL {
                vec![f64::INFINITY; probes.len()]
            } else {
                let p = HermitianMatrix::new(eig.reconstruct_with(unit))?;
                let dim = m.rows();
                probes
                    .iter()
                    .map(|x| {
                        x.to_dense(dim)
                            .map(|v| p.quadratic_form(&v))
                            .ok_or(EnvelopeError::InvalidSequence("probe lies outside the model".into()))
                    })
                    .collect::<Result<_, _>>()?
            }
        }
    };
    Ok(Some(limits))
}

/// Closed-form certificate for quasinormal models. The orbit sequences are
/// then non-increasing, so their shifted means converge uniformly to the
/// limit, and the certificate reduces to `|⟨Qx; x⟩ − lim ‖Tⁿx‖²| ≤ tol`.
pub fn quasinormal_certificate(
    t: &OperatorModel,
    q_form: &[f64],
    probes: &[SupportedVector],
    tol: f64,
) -> Result<Option<QCertificate>, EnvelopeError> {
    check_lengths(q_form, probes)?;
    let Some(limits) = quasinormal_limits(t, probes)? else { return Ok(None) };
    let per_probe = q_form
        .iter()
        .zip(limits)
        .map(|(&q, limit)| ProbeCertificate { q_value: q, limit, deviation: (q - limit).abs(), trend: Vec::new() })
        .collect();
    Ok(Some(certificate(per_probe, tol, true)))
}

/// The uniform-in-`j` convergence of `(1/n) Σ_{k<n} ‖T^{k+j}x‖²` to
/// `⟨Qx; x⟩`, checked on each probe along the window grid. A probe passes
/// when the deviation at the largest window is at most `tol`. A failing
/// probe whose deviation rose at the last doubling makes the whole answer
/// `Inconclusive` unless another probe already fails outright.
pub fn sweep_certificate(
    t: &OperatorModel,
    q_form: &[f64],
    probes: &[SupportedVector],
    horizon: usize,
    tol: f64,
) -> Result<QCertificate, EnvelopeError> {
    check_lengths(q_form, probes)?;
    let mut per_probe = Vec::with_capacity(probes.len());
    let mut rising = None;
    let mut failed = false;
    for (x, &q) in probes.iter().zip(q_form) {
        let orbit = orbit_sequence(t, x, horizon)?;
        let noise = NOISE_FLOOR.max(ORBIT_ROUNDING_PER_STEP * orbit.len() as f64)
            * orbit.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let est = sweep(orbit, tol)?;
        let trend: Vec<(usize, f64)> = est.trend.iter().map(|r| (r.n, r.deviation_from(q))).collect();
        let last = trend.last().expect("non-empty grid").1;
        if last > tol {
            match trend.len().checked_sub(2).map(|k| trend[k].1) {
                Some(previous) if last > previous + noise => rising = Some((previous, last)),
                _ => failed = true,
            }
        }
        per_probe.push(ProbeCertificate { q_value: q, limit: est.midpoint(), deviation: last, trend });
    }
    if let (false, Some((previous, last))) = (failed, rising) {
        return Err(EnvelopeError::Inconclusive { previous, last });
    }
    Ok(certificate(per_probe, tol, false))
}

/// Whether `Q = A_φ` for all Banach limits, judged on the probes: the
/// closed form for quasinormal models, the orbit sweep otherwise.
pub fn q_equals_aphi_certificate(
    t: &OperatorModel,
    q_form: &[f64],
    probes: &[SupportedVector],
    horizon: usize,
    tol: f64,
) -> Result<QCertificate, EnvelopeError> {
    match quasinormal_certificate(t, q_form, probes, tol)? {
        Some(c) => Ok(c),
        None => sweep_certificate(t, q_form, probes, horizon, tol),
    }
}
