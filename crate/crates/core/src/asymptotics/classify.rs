use serde::Serialize;

use super::AsymptoticsError;
use crate::ensemble::default_probes;
use crate::linalg::{operator_norm, svd, ComplexMatrix};
use crate::models::{orbit_norms, power_extremes, OperatorModel, SupportedVector};

pub const DEFAULT_CLASSIFY_HORIZON: usize = 1 << 12;
/// `‖Tⁿ‖` growing by more than this factor between `[N/4, N/2]` and
/// `(N/2, N]` means power unbounded.
pub const GROWTH_RATIO_LIMIT: f64 = 1.25;
/// Orbits are sampled at every index up to this one, then on a grid.
const DENSE_SAMPLE_PREFIX: usize = 256;
const SAMPLES_PER_OCTAVE: f64 = 16.0;

/// A yes/no answer with the number it was decided on. `holds` compares
/// `measure` against `threshold` in the direction documented per field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub measure: f64,
    pub threshold: f64,
}

/// Numerical verdicts from powers `n ≤ horizon`. Finite evidence can refute
/// but not prove the asymptotic classes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub horizon: usize,
    /// `max_{n ≤ N} ‖Tⁿ‖`, with `n = 0` included.
    pub beta_hat: f64,
    /// `min_{n ≤ N} inf ‖Tⁿx‖/‖x‖`, with `n = 0` included.
    pub alpha_hat: f64,
    /// measure: growth ratio of `‖Tⁿ‖` between the last two quarters; holds if `≤ threshold`.
    pub power_bounded: Verdict,
    /// measure: `alpha_hat`; holds if `> threshold`.
    pub power_bounded_below: Verdict,
    /// measure: worst decay score over probes (or `‖Tⁿ‖` for dense); holds if `≤ threshold`.
    pub class_c0: Verdict,
    /// measure: smallest late-orbit norm ratio; holds if `> threshold`.
    pub class_c1: Verdict,
    /// measure: isometry defect; holds if `≤ threshold`.
    pub isometry: Verdict,
    pub similar_to_isometry: bool,
    pub sampled_n: Vec<usize>,
}

fn sample_grid(horizon: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..=horizon.min(DENSE_SAMPLE_PREFIX)).collect();
    let mut j = 1.0;
    loop {
        let n = (DENSE_SAMPLE_PREFIX as f64 * 2f64.powf(j / SAMPLES_PER_OCTAVE)).round() as usize;
        if n >= horizon {
            break;
        }
        out.push(n);
        j += 1.0;
    }
    out.extend([horizon / 4, horizon / 2, 3 * horizon / 4, horizon]);
    out.sort_unstable();
    out.dedup();
    out
}

fn window_max(samples: &[(usize, f64)], lo: usize, hi: usize) -> f64 {
    samples.iter().filter(|(n, _)| *n >= lo && *n <= hi).map(|(_, v)| *v).fold(0.0, f64::max)
}

fn window_min(samples: &[(usize, f64)], lo: usize, hi: usize) -> f64 {
    samples.iter().filter(|(n, _)| *n >= lo && *n <= hi).map(|(_, v)| *v).fold(f64::INFINITY, f64::min)
}

/// Decay score of a sampled orbit: `≤ 1` when the last quarter is tiny
/// (`≤ 1e-6·scale`) or at most half the second quarter.
fn decay_score(samples: &[(usize, f64)], horizon: usize, scale: f64) -> f64 {
    let late = window_max(samples, 3 * horizon / 4, horizon);
    let early = window_max(samples, horizon / 4, horizon / 2);
    if late == 0.0 {
        return 0.0;
    }
    (late / (1e-6 * scale)).min(late / (0.5 * early))
}

fn isometry_defect(t: &OperatorModel) -> Result<f64, AsymptoticsError> {
    Ok(match t {
        OperatorModel::Dense(m) => {
            let d = m.congruence(&ComplexMatrix::identity(m.rows())).sub(&ComplexMatrix::identity(m.rows()));
            if d.max_abs() == 0.0 {
                0.0
            } else {
                operator_norm(&d)?
            }
        }
        OperatorModel::WeightedShift(w) => w.distinct_values().iter().map(|v| (v * v - 1.0).abs()).fold(0.0, f64::max),
        OperatorModel::Diagonal(d) => d.distinct_moduli().iter().map(|v| (v * v - 1.0).abs()).fold(0.0, f64::max),
        OperatorModel::DirectSum(parts) => {
            let mut worst = 0.0f64;
            for p in parts {
                worst = worst.max(isometry_defect(p)?);
            }
            worst
        }
    })
}

/// `classify_with_probes` on the default probe set (seed 0).
pub fn classify(t: &OperatorModel, n_max: usize, tol: f64) -> Result<ClassificationReport, AsymptoticsError> {
    classify_with_probes(t, n_max, tol, &default_probes(t, 0))
}

/// Power-boundedness from `‖Tⁿ‖` on a sample grid, bounded-below from the
/// smallest singular value (dense) or the smallest weight window
/// (structured), and the classes C₀·/C₁· from orbit decay. Dense models use
/// the whole matrix power; structured models use the probe orbits.
pub fn classify_with_probes(
    t: &OperatorModel,
    n_max: usize,
    tol: f64,
    probes: &[SupportedVector],
) -> Result<ClassificationReport, AsymptoticsError> {
    let horizon = n_max.max(16);
    let grid = sample_grid(horizon);
    let dense = t.to_dense();
    let mut sup = Vec::with_capacity(grid.len());
    let mut inf = Vec::with_capacity(grid.len());
    let mut overflow = false;
    match &dense {
        Some(m) => {
            let mut p = ComplexMatrix::identity(m.rows());
            let mut at = 0usize;
            for &n in &grid {
                p = if n - at <= DENSE_SAMPLE_PREFIX {
                    (at..n).fold(p, |acc, _| acc.matmul(m))
                } else {
                    m.pow(n as u64)
                };
                at = n;
                if !p.is_finite() || p.max_abs() > 1e150 {
                    overflow = true;
                    break;
                }
                if p.max_abs() == 0.0 {
                    sup.push((n, 0.0));
                    inf.push((n, 0.0));
                    continue;
                }
                let s = svd(&p, false)?;
                sup.push((n, s.singular_values[0]));
                inf.push((n, *s.singular_values.last().unwrap()));
            }
        }
        None => {
            for &n in &grid {
                let (s, i) = power_extremes(t, n)?;
                if !s.is_finite() {
                    overflow = true;
                    break;
                }
                sup.push((n, s));
                inf.push((n, i));
            }
        }
    }
    let beta_hat = if overflow { f64::INFINITY } else { sup.iter().map(|s| s.1).fold(0.0, f64::max) };
    let alpha_hat = inf.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let growth = if overflow {
        f64::INFINITY
    } else {
        let late = window_max(&sup, horizon / 2 + 1, horizon);
        let early = window_max(&sup, horizon / 4, horizon / 2);
        if late == 0.0 {
            0.0
        } else {
            late / early
        }
    };
    let power_bounded = Verdict {
        holds: growth <= GROWTH_RATIO_LIMIT && beta_hat <= super::DIVERGENCE_NORM,
        measure: growth,
        threshold: GROWTH_RATIO_LIMIT,
    };
    let power_bounded_below = Verdict { holds: alpha_hat > tol, measure: alpha_hat, threshold: tol };

    let (c0_score, c1_ratio) = match (&dense, overflow) {
        (_, true) | (None, false) => probe_classes(t, horizon, probes)?,
        (Some(_), false) => {
            let scale = beta_hat.max(1.0);
            (decay_score(&sup, horizon, scale), window_min(&inf, horizon / 2, horizon))
        }
    };
    let class_c0 = Verdict { holds: c0_score <= 1.0, measure: c0_score, threshold: 1.0 };
    let class_c1 = Verdict { holds: c1_ratio > tol, measure: c1_ratio, threshold: tol };
    let similar_to_isometry = power_bounded.holds && power_bounded_below.holds;
    let defect = isometry_defect(t)?;
    let isometry = Verdict { holds: defect <= tol && similar_to_isometry, measure: defect, threshold: tol };
    Ok(ClassificationReport {
        horizon,
        beta_hat,
        alpha_hat,
        power_bounded,
        power_bounded_below,
        class_c0,
        class_c1,
        isometry,
        similar_to_isometry,
        sampled_n: grid,
    })
}

/// `(worst decay score, smallest ‖Tⁿx‖/‖x‖ over n ∈ [N/2, N])` over probes.
fn probe_classes(
    t: &OperatorModel,
    horizon: usize,
    probes: &[SupportedVector],
) -> Result<(f64, f64), AsymptoticsError> {
    let mut score = 0.0f64;
    let mut low = f64::INFINITY;
    for x in probes {
        let xn = x.norm();
        if xn == 0.0 {
            continue;
        }
        let orbit = orbit_norms(t, x, horizon)?;
        let samples: Vec<(usize, f64)> = orbit.iter().enumerate().map(|(n, v)| (n, v.sqrt() / xn)).collect();
        score = score.max(decay_score(&samples, horizon, 1.0));
        low = low.min(window_min(&samples, horizon / 2, horizon));
    }
    Ok((score, low))
}
