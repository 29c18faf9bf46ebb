//! Extremal Banach-limit values of bounded real sequences.
//!
//! For a bounded sequence `ξ`, every Banach limit lies between
//! `φ₋(ξ) = limₙ infⱼ (1/n) Σ_{k<n} ξ_{k+j}` and `φ₊(ξ) = limₙ supⱼ (…)`, and
//! all Banach limits agree exactly when the shifted means converge uniformly
//! in `j`. The double limits are estimated on a grid of window lengths `n`
//! with the trend kept alongside the reported values.

mod axioms;
mod forms;

pub use axioms::{banach_axiom_suite, AxiomReport, AxiomSuiteConfig, AxiomTally, AxiomViolation};
pub use forms::{
    phi_asymptotic_form, q_equals_aphi_certificate, quasinormal_certificate, sweep_certificate, vector_envelope,
    PhiFormBounds, PhiFormEntry, ProbeCertificate, QCertificate, DEFAULT_ORBIT_HORIZON,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asymptotics::AsymptoticsError;
use crate::linalg::LinalgError;
use crate::models::ModelError;
use crate::summation::CompensatedSum;

/// Envelopes are only estimated from at least this many samples.
pub const MIN_SAMPLE: usize = 64;
pub const DEFAULT_ENVELOPE_TOL: f64 = 1e-9;
const GRID_MIN_LOG2: u32 = 6;
const GRID_MAX_LOG2: u32 = 12;
/// Deviations at or below this multiple of the sequence scale count as
/// rounding noise in the trend tests.
const NOISE_FLOOR: f64 = 1e-12;
/// A deviation trend that drops below this fraction across two doublings is
/// still converging at the `1/n` rate.
const STILL_CONVERGING: f64 = 0.3;

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("window needs {needed} terms but only {available} are available")]
    OutOfRange { needed: usize, available: usize },
    #[error("{len} samples is too short for envelope estimation (need {required})")]
    InsufficientData { len: usize, required: usize },
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("invalid window grid: {0}")]
    InvalidGrid(String),
    #[error("trend is not monotone at the largest window lengths ({previous:e} then {last:e})")]
    Inconclusive { previous: f64, last: f64 },
    #[error("orbit grows monotonically from n = {from} to n = {to} (ratio {growth})")]
    NotPowerBoundedEvidence { from: usize, to: usize, growth: f64 },
    #[error("{expected} probe values expected, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
}

/// What is known about a sequence beyond its sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SequenceTail {
    Unspecified,
    /// `ξ_k = period[k mod p]` from the end of the sample on.
    Periodic(Vec<f64>),
    /// `ξ_k → limit`.
    Convergent(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundedSequence {
    sample: Vec<f64>,
    tail: SequenceTail,
}

impl BoundedSequence {
    pub fn new(sample: Vec<f64>, tail: SequenceTail) -> Result<Self, EnvelopeError> {
        if let Some(k) = sample.iter().position(|v| !v.is_finite()) {
            return Err(EnvelopeError::InvalidSequence(format!("sample[{k}] is not finite")));
        }
        match &tail {
            SequenceTail::Unspecified => {}
            SequenceTail::Convergent(l) if !l.is_finite() => {
                return Err(EnvelopeError::InvalidSequence("limit is not finite".into()));
            }
            SequenceTail::Convergent(_) => {}
            SequenceTail::Periodic(p) => {
                if p.is_empty() || p.iter().any(|v| !v.is_finite()) {
                    return Err(EnvelopeError::InvalidSequence("period must be non-empty and finite".into()));
                }
                let scale = p.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                let from = sample.len().saturating_sub(p.len());
                for (k, v) in sample.iter().enumerate().skip(from) {
                    if (v - p[k % p.len()]).abs() > 1e-12 * scale {
                        return Err(EnvelopeError::InvalidSequence(format!(
                            "sample[{k}] = {v} does not continue the period"
                        )));
                    }
                }
            }
        }
        Ok(BoundedSequence { sample, tail })
    }

    pub fn from_sample(sample: Vec<f64>) -> Result<Self, EnvelopeError> {
        Self::new(sample, SequenceTail::Unspecified)
    }

    pub fn constant(c: f64, len: usize) -> Result<Self, EnvelopeError> {
        Self::new(vec![c; len], SequenceTail::Convergent(c))
    }

    /// `len` terms of `period` repeated from index 0, with a periodic tail.
    pub fn periodic(period: &[f64], len: usize) -> Result<Self, EnvelopeError> {
        if period.is_empty() {
            return Err(EnvelopeError::InvalidSequence("empty period".into()));
        }
        let sample = (0..len).map(|k| period[k % period.len()]).collect();
        Self::new(sample, SequenceTail::Periodic(period.to_vec()))
    }

    /// `0/1` blocks of lengths `1, 1, 2, 2, 4, 4, …`, starting with zeros.
    /// Its shifted means stay spread between 0 and 1 for every window
    /// length, so `φ₋ = 0 < 1 = φ₊`.
    pub fn doubling_blocks(len: usize) -> Self {
        let mut sample = Vec::with_capacity(len);
        let mut block = 1usize;
        'outer: loop {
            for v in [0.0, 1.0] {
                for _ in 0..block {
                    if sample.len() == len {
                        break 'outer;
                    }
                    sample.push(v);
                }
            }
            block *= 2;
        }
        BoundedSequence { sample, tail: SequenceTail::Unspecified }
    }

    pub fn sample(&self) -> &[f64] {
        &self.sample
    }

    pub fn tail(&self) -> &SequenceTail {
        &self.tail
    }

    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    /// Number of known terms; `None` when a periodic tail makes it unbounded.
    pub fn available(&self) -> Option<usize> {
        match self.tail {
            SequenceTail::Periodic(_) => None,
            _ => Some(self.sample.len()),
        }
    }

    pub fn value(&self, k: usize) -> Option<f64> {
        match (self.sample.get(k), &self.tail) {
            (Some(v), _) => Some(*v),
            (None, SequenceTail::Periodic(p)) => Some(p[k % p.len()]),
            (None, _) => None,
        }
    }

    pub fn sup_abs(&self) -> f64 {
        let s = self.sample.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        match &self.tail {
            SequenceTail::Unspecified => s,
            SequenceTail::Periodic(p) => p.iter().fold(s, |m, v| m.max(v.abs())),
            SequenceTail::Convergent(l) => s.max(l.abs()),
        }
    }

    /// The backward shift applied `by` times: `ξ'_k = ξ_{k+by}`.
    pub fn shifted(&self, by: usize) -> Self {
        let sample = match self.available() {
            None => (by..by.max(self.len())).map(|k| self.value(k).expect("periodic")).collect(),
            Some(n) => self.sample[by.min(n)..].to_vec(),
        };
        let tail = match &self.tail {
            SequenceTail::Periodic(p) => SequenceTail::Periodic((0..p.len()).map(|k| p[(k + by) % p.len()]).collect()),
            t => t.clone(),
        };
        BoundedSequence { sample, tail }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let tail = match &self.tail {
            SequenceTail::Unspecified => SequenceTail::Unspecified,
            SequenceTail::Periodic(p) => SequenceTail::Periodic(p.iter().map(|v| c * v).collect()),
            SequenceTail::Convergent(l) => SequenceTail::Convergent(c * l),
        };
        BoundedSequence { sample: self.sample.iter().map(|v| c * v).collect(), tail }
    }
}

/// `(1/n) Σ_{k<n} ξ_{k+j}`, summed with compensation.
pub fn shifted_cesaro(xs: &BoundedSequence, n: usize, j: usize) -> Result<f64, EnvelopeError> {
    if n == 0 {
        return Err(EnvelopeError::InvalidGrid("window length must be positive".into()));
    }
    if let Some(avail) = xs.available() {
        if j + n > avail {
            return Err(EnvelopeError::OutOfRange { needed: j + n, available: avail });
        }
    }
    let mut s = CompensatedSum::new();
    for k in j..j + n {
        s.add(xs.value(k).expect("range checked"));
    }
    Ok(s.value() / n as f64)
}

/// Prefix sums kept as unmerged (sum, correction) pairs, so window sums are
/// differences of compensated totals.
struct Prefix(Vec<(f64, f64)>);

impl Prefix {
    fn new(xs: &[f64]) -> Self {
        let mut out = Vec::with_capacity(xs.len() + 1);
        let mut s = CompensatedSum::new();
        out.push(s.parts());
        for &x in xs {
            s.add(x);
            out.push(s.parts());
        }
        Prefix(out)
    }

    fn mean(&self, j: usize, n: usize) -> f64 {
        let (a, ca) = self.0[j];
        let (b, cb) = self.0[j + n];
        ((b - a) + (cb - ca)) / n as f64
    }
}

/// One window length of the sweep: extremes of the shifted means over `j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TrendRow {
    pub n: usize,
    pub inf: f64,
    pub sup: f64,
}

impl TrendRow {
    /// `supⱼ |mean(n, j) − value|`.
    pub fn deviation_from(&self, value: f64) -> f64 {
        (self.sup - value).max(value - self.inf)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeEstimate {
    pub phi_minus: f64,
    pub phi_plus: f64,
    /// Largest window length of the sweep.
    pub n_used: usize,
    /// Number of shifts `j` at the largest window length.
    pub j_range: usize,
    /// First shift of the sweep; earlier terms are treated as transient.
    pub burn_in: usize,
    /// Shifted means converge uniformly in `j` to the midpoint.
    pub uniform: bool,
    /// `supⱼ |mean − midpoint|` at the largest window.
    pub deviation: f64,
    pub tolerance: f64,
    /// Answered from the tail (period mean or limit) instead of the sweep.
    pub exact: bool,
    /// Range of the sample from `burn_in` on; the finite stand-in for
    /// `liminf` and `limsup`.
    pub tail_min: f64,
    pub tail_max: f64,
    pub trend: Vec<TrendRow>,
}

impl EnvelopeEstimate {
    pub fn gap(&self) -> f64 {
        self.phi_plus - self.phi_minus
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.phi_minus + self.phi_plus)
    }

    fn deviations(&self) -> Vec<f64> {
        let mid = self.midpoint();
        self.trend.iter().map(|r| r.deviation_from(mid)).collect()
    }
}

/// Powers of two from `2⁶` to `2¹²` that fit in half the sample. Shorter
/// samples fall back to `N/8, N/4, N/2`.
pub fn default_grid(len: usize) -> Vec<usize> {
    let grid: Vec<usize> = (GRID_MIN_LOG2..=GRID_MAX_LOG2).map(|k| 1usize << k).filter(|&n| n <= len / 2).collect();
    if grid.len() >= 3 {
        return grid;
    }
    let mut small: Vec<usize> = [len / 8, len / 4, len / 2].into_iter().filter(|&n| n > 0).collect();
    small.dedup();
    small
}

fn sorted_grid(n_grid: &[usize], len: usize) -> Result<Vec<usize>, EnvelopeError> {
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    match (grid.first(), grid.last()) {
        (None, _) => Err(EnvelopeError::InvalidGrid("empty grid".into())),
        (Some(0), _) => Err(EnvelopeError::InvalidGrid("window length must be positive".into())),
        (_, Some(&top)) if top > len / 2 => {
            Err(EnvelopeError::InvalidGrid(format!("window length {top} exceeds half the sample ({len})")))
        }
        _ => Ok(grid),
    }
}

/// `envelope_with_tol` with the default tolerance.
pub fn envelope(xs: &BoundedSequence, n_grid: &[usize], j_max: usize) -> Result<EnvelopeEstimate, EnvelopeError> {
    envelope_with_tol(xs, n_grid, j_max, DEFAULT_ENVELOPE_TOL)
}

/// `envelope` on the default grid with every shift the sample allows.
pub fn estimate(xs: &BoundedSequence) -> Result<EnvelopeEstimate, EnvelopeError> {
    envelope(xs, &default_grid(xs.len()), xs.len())
}

/// For each `n` in the grid, the infimum and supremum over
/// `j ∈ [burn_in, min(j_max, N − n)]` of the shifted means, where
/// `burn_in = ⌊(N − n_max)/2⌋`. The largest `n` gives `(φ₋, φ₊)`.
///
/// Periodic tails are answered with the period mean and convergent tails
/// with the limit; the trend is still reported for diagnostics.
///
/// The estimate is `uniform` when the deviation from the midpoint ends at or
/// below `tol` and has at least halved across the last two doublings (or is
/// already at rounding level).
pub fn envelope_with_tol(
    xs: &BoundedSequence,
    n_grid: &[usize],
    j_max: usize,
    tol: f64,
) -> Result<EnvelopeEstimate, EnvelopeError> {
    envelope_with_noise(xs, n_grid, j_max, tol, NOISE_FLOOR)
}

/// `envelope_with_tol` with the rounding level given relative to the
/// sequence scale. Computed sequences (orbits built by repeated products)
/// carry rounding that grows with their length.
pub(crate) fn envelope_with_noise(
    xs: &BoundedSequence,
    n_grid: &[usize],
    j_max: usize,
    tol: f64,
    noise_floor: f64,
) -> Result<EnvelopeEstimate, EnvelopeError> {
    match xs.tail() {
        SequenceTail::Periodic(p) => return Ok(periodic_envelope(p, n_grid, tol)),
        SequenceTail::Convergent(l) => return convergent_envelope(xs, *l, n_grid, j_max, tol),
        SequenceTail::Unspecified => {}
    }
    let len = xs.len();
    if len < MIN_SAMPLE {
        return Err(EnvelopeError::InsufficientData { len, required: MIN_SAMPLE });
    }
    let grid = sorted_grid(n_grid, len)?;
    let n_max = *grid.last().expect("grid checked");
    let burn_in = (len - n_max) / 2;
    if j_max < burn_in {
        return Err(EnvelopeError::InvalidGrid(format!("j_max = {j_max} ends before the burn-in {burn_in}")));
    }
    let prefix = Prefix::new(xs.sample());
    let trend: Vec<TrendRow> = grid
        .iter()
        .map(|&n| {
            let hi = j_max.min(len - n);
            let (inf, sup) = (burn_in..=hi)
                .into_par_iter()
                .map(|j| {
                    let m = prefix.mean(j, n);
                    (m, m)
                })
                .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
            TrendRow { n, inf, sup }
        })
        .collect();
    let last = *trend.last().expect("grid checked");
    let tail = &xs.sample()[burn_in..];
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let tail_max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut est = EnvelopeEstimate {
        phi_minus: last.inf,
        phi_plus: last.sup,
        n_used: n_max,
        j_range: j_max.min(len - n_max) - burn_in + 1,
        burn_in,
        uniform: false,
        deviation: 0.0,
        tolerance: tol,
        exact: false,
        tail_min,
        tail_max,
        trend,
    };
    let devs = est.deviations();
    let d_last = *devs.last().expect("grid checked");
    let reference = devs[devs.len().saturating_sub(3)];
    let noise = noise_floor.max(NOISE_FLOOR) * tail_min.abs().max(tail_max.abs()).max(1.0);
    est.deviation = d_last;
    est.uniform = d_last <= tol && (d_last <= 0.5 * reference || d_last <= noise);
    Ok(est)
}

fn periodic_envelope(period: &[f64], n_grid: &[usize], tol: f64) -> EnvelopeEstimate {
    let p = period.len();
    let mut s = CompensatedSum::new();
    for &v in period {
        s.add(v);
    }
    let mean = s.value() / p as f64;
    let mut grid: Vec<usize> = n_grid.iter().copied().filter(|&n| n > 0).collect();
    grid.sort_unstable();
    grid.dedup();
    // one full period of shifts covers every window
    let trend = grid
        .iter()
        .map(|&n| {
            let mut inf = f64::INFINITY;
            let mut sup = f64::NEG_INFINITY;
            for j in 0..p {
                let mut w = CompensatedSum::new();
                for k in 0..n {
                    w.add(period[(j + k) % p]);
                }
                let m = w.value() / n as f64;
                inf = inf.min(m);
                sup = sup.max(m);
            }
            TrendRow { n, inf, sup }
        })
        .collect::<Vec<_>>();
    let deviation = trend.last().map_or(0.0, |r| r.deviation_from(mean));
    EnvelopeEstimate {
        phi_minus: mean,
        phi_plus: mean,
        n_used: grid.last().copied().unwrap_or(0),
        j_range: p,
        burn_in: 0,
        uniform: true,
        deviation,
        tolerance: tol,
        exact: true,
        tail_min: period.iter().copied().fold(f64::INFINITY, f64::min),
        tail_max: period.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        trend,
    }
}

fn convergent_envelope(
    xs: &BoundedSequence,
    limit: f64,
    n_grid: &[usize],
    j_max: usize,
    tol: f64,
) -> Result<EnvelopeEstimate, EnvelopeError> {
    let swept = if xs.len() >= MIN_SAMPLE {
        let open = BoundedSequence { sample: xs.sample.clone(), tail: SequenceTail::Unspecified };
        Some(envelope_with_tol(&open, n_grid, j_max, tol)?)
    } else {
        None
    };
    let (n_used, j_range, burn_in, trend) =
        swept.as_ref().map_or((0, 0, 0, Vec::new()), |e| (e.n_used, e.j_range, e.burn_in, e.trend.clone()));
    Ok(EnvelopeEstimate {
        phi_minus: limit,
        phi_plus: limit,
        n_used,
        j_range,
        burn_in,
        uniform: true,
        deviation: trend.last().map_or(0.0, |r| r.deviation_from(limit)),
        tolerance: tol,
        exact: true,
        tail_min: swept.as_ref().map_or(limit, |e| e.tail_min.min(limit)),
        tail_max: swept.as_ref().map_or(limit, |e| e.tail_max.max(limit)),
        trend,
    })
}

/// Outcome of the all-Banach-limits-agree test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Agreement {
    pub agree: bool,
    /// Midpoint of the final envelope.
    pub value: f64,
    pub deviation: f64,
    pub gap: f64,
    pub tolerance: f64,
}

/// All Banach limits take the same value on `xs` when the shifted means
/// converge uniformly in `j`: the deviation from the midpoint must be
/// non-increasing at the largest window lengths, end at or below `tol`, and
/// the envelope gap must be at most `2·tol`.
///
/// A trend that rises at the last doubling, or one still shrinking at the
/// `1/n` rate without having reached `tol`, is reported as `Inconclusive`.
pub fn all_banach_limits_agree(xs: &BoundedSequence, tol: f64) -> Result<Agreement, EnvelopeError> {
    let est = envelope_with_tol(xs, &default_grid(xs.len()), xs.len(), tol)?;
    let value = est.midpoint();
    if est.exact {
        return Ok(Agreement { agree: true, value, deviation: 0.0, gap: est.gap(), tolerance: tol });
    }
    let devs = est.deviations();
    let d_last = est.deviation;
    let agree = d_last <= tol && est.gap() <= 2.0 * tol;
    if !agree && devs.len() >= 2 {
        let noise = NOISE_FLOOR * est.tail_min.abs().max(est.tail_max.abs()).max(1.0);
        let previous = devs[devs.len() - 2];
        let reference = devs[devs.len().saturating_sub(3)];
        if d_last > previous + noise || d_last <= STILL_CONVERGING * reference {
            return Err(EnvelopeError::Inconclusive { previous, last: d_last });
        }
    }
    Ok(Agreement { agree, value, deviation: d_last, gap: est.gap(), tolerance: tol })
}
