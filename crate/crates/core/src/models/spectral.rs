use serde::Serialize;

use super::{ModelError, OperatorModel};
use crate::linalg::{operator_norm, svd, ComplexMatrix};

/// `‖Tⁿ‖`.
pub fn power_norm_estimate(t: &OperatorModel, n: usize) -> Result<f64, ModelError> {
    Ok(power_extremes(t, n)?.0)
}

/// `inf_{x≠0} ‖Tⁿx‖/‖x‖`: the smallest singular value of `Tⁿ` for dense
/// operators, the smallest window product for shifts.
pub fn power_lower_bound(t: &OperatorModel, n: usize) -> Result<f64, ModelError> {
    Ok(power_extremes(t, n)?.1)
}

fn dense_bounds(m: &ComplexMatrix) -> Result<(f64, f64), ModelError> {
    if m.max_abs() == 0.0 {
        return Ok((0.0, 0.0));
    }
    let s = svd(m, false)?;
    Ok((s.singular_values[0], *s.singular_values.last().unwrap()))
}

/// `(‖Tⁿ‖, inf_{x≠0} ‖Tⁿx‖/‖x‖)`.
pub fn power_extremes(t: &OperatorModel, n: usize) -> Result<(f64, f64), ModelError> {
    match t {
        OperatorModel::Dense(m) => dense_bounds(&m.pow(n as u64)),
        OperatorModel::WeightedShift(w) => Ok(w.window_extremes(n)),
        OperatorModel::Diagonal(d) => {
            let mods = d.distinct_moduli();
            let e = n as i32;
            Ok((mods.last().unwrap().powi(e), mods[0].powi(e)))
        }
        OperatorModel::DirectSum(parts) => {
            let mut sup = 0.0f64;
            let mut inf = f64::INFINITY;
            for p in parts {
                let (s, i) = power_extremes(p, n)?;
                sup = sup.max(s);
                inf = inf.min(i);
            }
            Ok((sup, inf))
        }
    }
}

/// `(‖Tⁿ‖, inf ‖Tⁿx‖/‖x‖)` for `n = 0..=n_max`; dense powers are built by
/// successive multiplication.
pub fn power_norm_profile(t: &OperatorModel, n_max: usize) -> Result<Vec<(f64, f64)>, ModelError> {
    match t {
        OperatorModel::Dense(m) => {
            let mut out = Vec::with_capacity(n_max + 1);
            let mut p = ComplexMatrix::identity(m.rows());
            out.push((1.0, 1.0));
            for _ in 0..n_max {
                p = p.matmul(m);
                if !p.is_finite() {
                    out.push((f64::INFINITY, f64::NAN));
                    continue;
                }
                out.push(dense_bounds(&p)?);
            }
            Ok(out)
        }
        OperatorModel::DirectSum(parts) => {
            let mut out = vec![(0.0f64, f64::INFINITY); n_max + 1];
            for p in parts {
                for (o, v) in out.iter_mut().zip(power_norm_profile(p, n_max)?) {
                    o.0 = o.0.max(v.0);
                    o.1 = o.1.min(v.1);
                }
            }
            Ok(out)
        }
        _ => (0..=n_max).map(|n| power_extremes(t, n)).collect(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralRadiusEstimate {
    pub value: f64,
    /// `|r_K − r_{K−1}|` between the last two doubling levels.
    pub spread: f64,
    pub levels: usize,
}

const GELFAND_LEVELS: usize = 10;

/// Gelfand estimate `lim ‖Tⁿ‖^{1/n}` over `n = 2^k`, `k ≤ 10`.
pub fn spectral_radius(t: &OperatorModel) -> Result<SpectralRadiusEstimate, ModelError> {
    match t {
        OperatorModel::Diagonal(d) => {
            Ok(SpectralRadiusEstimate { value: *d.distinct_moduli().last().unwrap(), spread: 0.0, levels: 0 })
        }
        OperatorModel::Dense(m) => gelfand(m),
        OperatorModel::WeightedShift(_) => {
            Err(ModelError::UnsupportedVariant { operation: "spectral_radius", variant: "weighted_shift" })
        }
        OperatorModel::DirectSum(parts) => {
            let mut best = SpectralRadiusEstimate { value: 0.0, spread: 0.0, levels: 0 };
            for p in parts {
                let r = spectral_radius(p).map_err(|_| ModelError::UnsupportedVariant {
                    operation: "spectral_radius",
                    variant: "direct_sum containing a weighted shift",
                })?;
                best.spread = best.spread.max(r.spread);
                best.levels = best.levels.max(r.levels);
                best.value = best.value.max(r.value);
            }
            Ok(best)
        }
    }
}

fn gelfand(m: &ComplexMatrix) -> Result<SpectralRadiusEstimate, ModelError> {
    // T^{2^k} = e^{scale} · p with p normalized in Frobenius norm
    let mut p = m.clone();
    let mut scale = 0.0f64;
    let mut logs = Vec::new();
    for k in 0..=GELFAND_LEVELS {
        let norm = operator_norm(&p)?;
        if norm == 0.0 {
            return Ok(SpectralRadiusEstimate { value: 0.0, spread: 0.0, levels: k });
        }
        let n = (1u64 << k) as f64;
        logs.push((scale + norm.ln()) / n);
        if k == GELFAND_LEVELS {
            break;
        }
        let sq = p.matmul(&p);
        let f = sq.frobenius_norm();
        if f == 0.0 {
            return Ok(SpectralRadiusEstimate { value: 0.0, spread: 0.0, levels: k + 1 });
        }
        p = sq.scale(1.0 / f);
        scale = 2.0 * scale + f.ln();
    }
    let last = logs[logs.len() - 1];
    let prev = logs[logs.len() - 2];
    // the O(1/n) term of log ‖Tⁿ‖^{1/n} cancels between consecutive doublings
    let upper = logs.iter().copied().fold(f64::INFINITY, f64::min).exp();
    let value = (2.0 * last - prev).exp().clamp(0.0, upper);
    Ok(SpectralRadiusEstimate { value, spread: (last.exp() - prev.exp()).abs(), levels: GELFAND_LEVELS })
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasinormalCheck {
    pub quasinormal: bool,
    pub residual: f64,
    /// Answered from the structure of the model rather than a matrix product.
    pub analytic: bool,
}

/// `T` commutes with `T*T`; residual `‖T(T*T) − (T*T)T‖`.
pub fn is_quasinormal(t: &OperatorModel, tol: f64) -> Result<QuasinormalCheck, ModelError> {
    let (residual, analytic) = quasinormal_residual(t)?;
    let norm = power_norm_estimate(t, 1)?;
    Ok(QuasinormalCheck { quasinormal: residual <= tol * norm.powi(3), residual, analytic })
}

fn quasinormal_residual(t: &OperatorModel) -> Result<(f64, bool), ModelError> {
    match t {
        OperatorModel::Dense(m) => {
            let g = m.adjoint().matmul(m);
            Ok((operator_norm(&m.matmul(&g).sub(&g.matmul(m)))?, false))
        }
        OperatorModel::Diagonal(_) => Ok((0.0, true)),
        OperatorModel::WeightedShift(w) => {
            // T*T = diag(w_k²); the commutator maps e_k to w_k (w_k² − w_{k+1}²) e_{k+1}
            let horizon = w.scan_horizon(1) + 1;
            let ws = w.weights(1, horizon + 1);
            let r = ws.windows(2).map(|p| p[0] * (p[0] * p[0] - p[1] * p[1]).abs()).fold(0.0, f64::max);
            Ok((r, true))
        }
        OperatorModel::DirectSum(parts) => {
            let mut worst = (0.0f64, true);
            for p in parts {
                let (r, a) = quasinormal_residual(p)?;
                worst = (worst.0.max(r), worst.1 && a);
            }
            Ok(worst)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormaloidCheck {
    pub normaloid: bool,
    /// `max_n |‖Tⁿ‖/‖T‖ⁿ − 1|` over the checked range.
    pub max_relative_deviation: f64,
    pub first_failure: Option<usize>,
    pub spectral_radius: Option<f64>,
    pub radius_matches_norm: Option<bool>,
}

// tolerance on r(T) = ‖T‖ given the accuracy of the Gelfand estimate
const RADIUS_MATCH_TOL: f64 = 5e-3;

/// `‖Tⁿ‖ = ‖T‖ⁿ` for `n ≤ n_max` within relative `tol`.
pub fn is_normaloid(t: &OperatorModel, n_max: usize, tol: f64) -> Result<NormaloidCheck, ModelError> {
    let profile = power_norm_profile(t, n_max)?;
    let norm = profile.get(1).map_or(1.0, |p| p.0);
    let mut worst = 0.0f64;
    let mut first_failure = None;
    if norm > 0.0 {
        for (n, &(pn, _)) in profile.iter().enumerate().skip(2) {
            let dev = if pn == 0.0 { 1.0 } else { ((pn.ln() - n as f64 * norm.ln()).exp() - 1.0).abs() };
            if dev > tol && first_failure.is_none() {
                first_failure = Some(n);
            }
            worst = worst.max(dev);
        }
    }
    let (spectral, matches) = match t {
        OperatorModel::Dense(_) => {
            let r = spectral_radius(t)?.value;
            let ok = norm == 0.0 || (r / norm - 1.0).abs() <= RADIUS_MATCH_TOL;
            (Some(r), Some(ok))
        }
        _ => (None, None),
    };
    Ok(NormaloidCheck {
        normaloid: first_failure.is_none(),
        max_relative_deviation: worst,
        first_failure,
        spectral_radius: spectral,
        radius_matches_norm: matches,
    })
}
