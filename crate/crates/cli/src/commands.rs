use std::collections::BTreeMap;

use asymptotica::asymptotics::{
    cesaro_asymptotic_limit, classify_with_probes, contraction_asymptotic_limit, kernel_of_limit, verify_theorem_items,
    AsymptoticReport, ItemCheck, ItemSet, KernelReport, CONTRACTION_SLACK, DEFAULT_CESARO_HORIZON,
    DEFAULT_CLASSIFY_HORIZON, DEFAULT_GRAM_HORIZON, DEFAULT_TOL,
};
use asymptotica::ensemble::default_probes;
use asymptotica::envelope::{
    default_grid, envelope_with_tol, phi_asymptotic_form, q_equals_aphi_certificate, vector_envelope, BoundedSequence,
    EnvelopeEstimate, DEFAULT_ENVELOPE_TOL, DEFAULT_ORBIT_HORIZON,
};
use asymptotica::linalg::{operator_norm, ComplexMatrix, PsdMatrix};
use asymptotica::models::{gallery_entries, orbit_norms, OperatorModel, SupportedVector};
use asymptotica::spec::matrix_to_pairs;
use asymptotica::witness::{isometry_witness, nagy_unitarization, SimilarityWitness, WitnessError, STRICT_TOL};
use serde_json::{json, Value};

use crate::{AnalysisRequest, CliError, Command, ResidualRow, Subject, Trace};

/// Default tolerance of the `Q = A_φ` certificate.
const DEFAULT_CERTIFY_TOL: f64 = 1e-6;
/// Relative eigenvalue threshold for the numerical kernel of a limit.
const KERNEL_TOL: f64 = 1e-6;
/// The polarized form needs `O(d²)` envelope sweeps; above this many probes
/// only the diagonal is reported.
const MAX_FORM_PROBES: usize = 32;

#[derive(Default)]
pub(crate) struct Context {
    pub items: BTreeMap<String, ItemCheck>,
    pub residuals: Vec<ResidualRow>,
    pub warnings: Vec<String>,
    pub tolerances: BTreeMap<String, f64>,
    pub horizons: BTreeMap<String, usize>,
    pub trace: Option<Trace>,
}

impl Context {
    fn claim(&mut self, quantity: impl Into<String>, residual: f64, tolerance: f64) {
        self.residuals.push(ResidualRow {
            quantity: quantity.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
        });
    }

    fn tol(&mut self, name: &str, value: f64) -> f64 {
        self.tolerances.insert(name.to_string(), value);
        value
    }

    fn horizon(&mut self, name: &str, value: usize) -> usize {
        self.horizons.insert(name.to_string(), value);
        value
    }

    fn warn(&mut self, message: impl Into<String>) {
        self.warnings.push(message.into());
    }

    fn items(&mut self, prefix: &str, checks: BTreeMap<String, ItemCheck>) {
        for (key, check) in checks {
            self.items.insert(format!("{prefix}.{key}"), check);
        }
    }
}

pub(crate) fn dispatch(req: &AnalysisRequest, ctx: &mut Context) -> Result<Value, CliError> {
    let result = match (&req.subject, req.command) {
        (_, Command::GalleryList) => Ok(json!(gallery_entries())),
        (Subject::Sequence(xs), Command::Envelope) => sequence_envelope(xs, req, ctx),
        (Subject::Operator(t), Command::Envelope) => operator_envelope(t, req, ctx),
        (Subject::Operator(t), Command::Analyze) => analyze(t, req, ctx),
        (Subject::Operator(t), Command::Witness) => witness(t, req, ctx),
        (Subject::Operator(t), Command::Classify) => classify(t, req, ctx),
        (Subject::Operator(t), Command::Certify) => certify(t, req, ctx),
        (_, c) => Err(CliError::Request(format!("{} got an unexpected input", c.name()))),
    };
    if req.trace.is_some() && ctx.trace.is_none() && result.is_ok() {
        ctx.warn(format!("{} produced no trace data; no trace file written", req.command.name()));
    }
    result
}

fn probes_for(t: &OperatorModel, req: &AnalysisRequest) -> Vec<SupportedVector> {
    req.probes.clone().unwrap_or_else(|| default_probes(t, req.seed))
}

fn model_summary(t: &OperatorModel) -> Value {
    json!({ "variant": t.variant_name(), "dimension": t.dimension() })
}

fn psd_json(a: &PsdMatrix) -> Value {
    json!(matrix_to_pairs(a.matrix()))
}

fn limit_json(rep: &AsymptoticReport, kernel: &KernelReport) -> Value {
    json!({
        "kind": rep.kind,
        "limit": psd_json(&rep.limit),
        "norm": operator_norm(rep.limit.matrix()).unwrap_or(f64::NAN),
        "iterations": rep.iterations,
        "final_delta": rep.final_delta,
        "intertwining_residual": rep.intertwining_residual,
        "tolerance": rep.tolerance,
        "kernel": {
            "dimension": kernel.basis.len(),
            "complement_eigenvalues": kernel.complement_eigenvalues,
            "kernel_orbits": kernel.kernel_orbits,
            "complement_orbits": kernel.complement_orbits,
            "cross_check": kernel.cross_check,
        },
    })
}

fn record_limit(ctx: &mut Context, name: &str, rep: &AsymptoticReport, kernel: &KernelReport) {
    ctx.claim(format!("{name}.final_delta"), rep.final_delta, rep.tolerance);
    // the stop rule bounds the Frobenius step, which dominates the operator norm
    ctx.claim(format!("{name}.intertwining"), rep.intertwining_residual, 10.0 * rep.tolerance);
    if !kernel.cross_check {
        ctx.warn(format!("{name}: kernel of the limit does not match orbit decay"));
    }
}

fn cesaro_trace(rep: &AsymptoticReport) -> Trace {
    let mut trace = Trace::new(&["n", "cesaro_mean_delta", "residual"]);
    for p in &rep.trace {
        trace.push(vec![p.n as f64, p.raw_delta, p.residual]);
    }
    trace
}

fn witness_json(ctx: &mut Context, w: &SimilarityWitness) -> Value {
    if let Some(r) = w.unitary_residual {
        ctx.claim("witness.unitary_residual", r, w.tolerance);
    }
    ctx.claim("witness.gram_residual", w.gram_residual, w.tolerance);
    ctx.claim("witness.isometry_residual", w.isometry_residual, w.tolerance);
    ctx.claim("witness.inverse_residual", w.inverse_residual, w.tolerance);
    ctx.claim("witness.fixed_point_residual", w.fixed_point_residual, w.tolerance);
    json!(w)
}

fn analyze(t: &OperatorModel, req: &AnalysisRequest, ctx: &mut Context) -> Result<Value, CliError> {
    let probes = probes_for(t, req);
    match t.to_dense() {
        Some(m) => analyze_dense(t, &m, &probes, req, ctx),
        None => analyze_structured(t, &probes, req, ctx),
    }
}

fn analyze_dense(
    t: &OperatorModel,
    m: &ComplexMatrix,
    probes: &[SupportedVector],
    req: &AnalysisRequest,
    ctx: &mut Context,
) -> Result<Value, CliError> {
    let tol = ctx.tol("limit_stop", req.tol.unwrap_or(DEFAULT_TOL));
    let horizon = ctx.horizon("classify", req.horizon.unwrap_or(DEFAULT_CLASSIFY_HORIZON));
    let norm = operator_norm(m)?;
    let class = classify_with_probes(t, horizon, tol, probes)?;
    let mut out = json!({ "model": model_summary(t), "norm": norm, "classification": class });

    let mut q = None;
    if class.power_bounded.holds {
        let rep = cesaro_asymptotic_limit(t, tol, ctx.horizon("cesaro", DEFAULT_CESARO_HORIZON))?;
        let kernel = kernel_of_limit(&rep.limit, t, ctx.tol("kernel", KERNEL_TOL))?;
        record_limit(ctx, "cesaro", &rep, &kernel);
        ctx.items("cesaro", verify_theorem_items(t, &rep, ItemSet::Cesaro)?);
        out["cesaro"] = limit_json(&rep, &kernel);
        ctx.trace = Some(cesaro_trace(&rep));
        q = Some(rep);
    } else {
        ctx.warn(format!(
            "not power bounded at horizon {horizon} (growth ratio {}); limits skipped",
            class.power_bounded.measure
        ));
    }

    if norm <= 1.0 + CONTRACTION_SLACK {
        let rep = contraction_asymptotic_limit(t, tol, ctx.horizon("contraction", DEFAULT_GRAM_HORIZON))?;
        let kernel = kernel_of_limit(&rep.limit, t, KERNEL_TOL)?;
        record_limit(ctx, "contraction", &rep, &kernel);
        ctx.items("contraction", verify_theorem_items(t, &rep, ItemSet::Contraction)?);
        out["contraction"] = limit_json(&rep, &kernel);
        if let Some(q) = &q {
            let d = q.limit.matrix().sub(rep.limit.matrix());
            let distance = if d.max_abs() == 0.0 { 0.0 } else { operator_norm(&d)? };
            out["limit_distance"] = json!(distance);
        }
    }

    if let Some(q) = &q {
        if q.limit.min_eigenvalue() > STRICT_TOL {
            match isometry_witness(t, &q.limit) {
                Ok(w) => out["witness"] = witness_json(ctx, &w),
                Err(WitnessError::WitnessDegraded { witness, residual, tolerance }) => {
                    ctx.warn(format!("degraded witness: residual {residual:e} above {tolerance:e}"));
                    out["witness"] = witness_json(ctx, &witness);
                }
                Err(e) => ctx.warn(format!("no similarity witness: {e}")),
            }
        }
    }
    Ok(out)
}

fn envelope_row(probe: usize, est: &EnvelopeEstimate) -> Value {
    json!({
        "probe": probe,
        "phi_minus": est.phi_minus,
        "phi_plus": est.phi_plus,
        "uniform": est.uniform,
        "deviation": est.deviation,
        "tolerance": est.tolerance,
        "n_used": est.n_used,
    })
}

/// Vector envelopes for every probe, with a per-probe trend trace.
fn probe_envelopes(
    t: &OperatorModel,
    probes: &[SupportedVector],
    horizon: usize,
    ctx: &mut Context,
) -> Result<Value, CliError> {
    let mut rows = Vec::with_capacity(probes.len());
    let mut trace = Trace::new(&["probe", "n", "mean_inf", "mean_sup"]);
    for (k, x) in probes.iter().enumerate() {
        let est = vector_envelope(t, x, horizon)?;
        ctx.claim(format!("envelope[{k}].uniformity"), est.deviation, est.tolerance);
        for r in &est.trend {
            trace.push(vec![k as f64, r.n as f64, r.inf, r.sup]);
        }
        rows.push(envelope_row(k, &est));
    }
    ctx.trace = Some(trace);
    Ok(json!(rows))
}

fn analyze_structured(
    t: &OperatorModel,
    probes: &[SupportedVector],
    req: &AnalysisRequest,
    ctx: &mut Context,
) -> Result<Value, CliError> {
    let tol = ctx.tol("classify", req.tol.unwrap_or(DEFAULT_TOL));
    let horizon = ctx.horizon("orbit", req.horizon.unwrap_or(DEFAULT_ORBIT_HORIZON));
    let class = classify_with_probes(t, horizon, tol, probes)?;
    let mut out = json!({ "model": model_summary(t), "classification": class });
    if class.power_bounded.holds {
        out["envelopes"] = probe_envelopes(t, probes, horizon, ctx)?;
    } else {
        ctx.warn(format!("not power bounded at horizon {horizon}; envelopes skipped"));
    }
    Ok(out)
}

fn sequence_envelope(xs: &[f64], req: &AnalysisRequest, ctx: &mut Context) -> Result<Value, CliError> {
    let tol = ctx.tol("uniformity", req.tol.unwrap_or(DEFAULT_ENVELOPE_TOL));
    let len = req.horizon.map_or(xs.len(), |h| h.min(xs.len()));
    ctx.horizon("sequence", len);
    let seq = BoundedSequence::from_sample(xs[..len].to_vec())?;
    let est = envelope_with_tol(&seq, &default_grid(len), len, tol)?;
    ctx.claim("envelope.uniformity", est.deviation, est.tolerance);
    let mut trace = Trace::new(&["n", "mean_inf", "mean_sup"]);
    for r in &est.trend {
        trace.push(vec![r.n as f64, r.inf, r.sup]);
    }
    ctx.trace = Some(trace);
    Ok(json!(est))
}

fn operator_envelope(t: &OperatorModel, req: &AnalysisRequest, ctx: &mut Context) -> Result<Value, CliError> {
    if req.tol.is_some() {
        ctx.warn("--tol is not used for operator envelopes; uniformity is judged at 1e-9 of the largest orbit value");
    }
    let horizon = ctx.horizon("orbit", req.horizon.unwrap_or(DEFAULT_ORBIT_HORIZON));
    let probes = probes_for(t, req);
    Ok(json!({ "model": model_summary(t), "envelopes": probe_envelopes(t, &probes, horizon, ctx)? }))
}

fn witness(t: &OperatorModel, req: &AnalysisRequest, ctx: &mut Context) -> Result<Value, CliError> {
    let tol = ctx.tol("limit_stop", req.tol.unwrap_or(DEFAULT_TOL));
    let horizon = ctx.horizon("classify", req.horizon.unwrap_or(DEFAULT_CLASSIFY_HORIZON));
    ctx.horizon("cesaro", DEFAULT_CESARO_HORIZON);
    let w = match nagy_unitarization(t, horizon, tol) {
        Ok(w) => w,
        Err(WitnessError::WitnessDegraded { witness, residual, tolerance }) => {
            ctx.warn(format!("degraded witness: residual {residual:e} above {tolerance:e}"));
            *witness
        }
        Err(e) => return Err(e.into()),
    };
    ctx.tol("witness", w.tolerance);
    let body = witness_json(ctx, &w);
    Ok(json!({ "model": model_summary(t), "witness": body }))
}

fn classify(t: &OperatorModel, req: &AnalysisRequest, ctx: &mut Context) -> Result<Value, CliError> {
    let tol = ctx.tol("classify", req.tol.unwrap_or(DEFAULT_TOL));
    let horizon = ctx.horizon("classify", req.horizon.unwrap_or(DEFAULT_CLASSIFY_HORIZON));
    let class = classify_with_probes(t, horizon, tol, &probes_for(t, req))?;
    Ok(json!({ "model": model_summary(t), "classification": class }))
}

/// `⟨Q x_j; x_i⟩` at `(i, j)`.
fn probe_gram(q: &ComplexMatrix, probes: &[SupportedVector]) -> ComplexMatrix {
    let d = probes.len();
    let dim = q.rows();
    let mut g = ComplexMatrix::zeros(d, d);
    for j in 0..d {
        let qx = SupportedVector::from_dense(&q.mul_vec(&probes[j].to_dense(dim).expect("probe inside dimension")));
        for i in 0..d {
            g[(i, j)] = qx.inner(&probes[i]);
        }
    }
    g
}

fn certify(t: &OperatorModel, req: &AnalysisRequest, ctx: &mut Context) -> Result<Value, CliError> {
    let tol = ctx.tol("certificate", req.tol.unwrap_or(DEFAULT_CERTIFY_TOL));
    let horizon = ctx.horizon("orbit", req.horizon.unwrap_or(DEFAULT_ORBIT_HORIZON));
    let probes = probes_for(t, req);
    let (q_form, q_gram, q_source) = match t.to_dense() {
        Some(_) => {
            let stop = ctx.tol("limit_stop", DEFAULT_TOL);
            let rep = cesaro_asymptotic_limit(t, stop, ctx.horizon("cesaro", DEFAULT_CESARO_HORIZON))?;
            let gram = probe_gram(rep.limit.matrix(), &probes);
            let diag = (0..probes.len()).map(|k| gram[(k, k)].re).collect::<Vec<_>>();
            (diag, Some(gram), "cesaro_limit")
        }
        None => {
            // mean of ‖Tⁿx‖² over the second half of the horizon
            let mut form = Vec::with_capacity(probes.len());
            for x in &probes {
                let orbit = orbit_norms(t, x, horizon)?;
                let tail = &orbit[horizon / 2..];
                form.push(tail.iter().sum::<f64>() / tail.len() as f64);
            }
            (form, None, "orbit_tail_mean")
        }
    };
    let cert = q_equals_aphi_certificate(t, &q_form, &probes, horizon, tol)?;
    ctx.claim("certificate.worst_deviation", cert.worst_deviation, cert.tolerance);
    let mut trace = Trace::new(&["probe", "n", "deviation"]);
    for (k, p) in cert.probes.iter().enumerate() {
        for &(n, dev) in &p.trend {
            trace.push(vec![k as f64, n as f64, dev]);
        }
    }
    if !trace.rows.is_empty() {
        ctx.trace = Some(trace);
    }
    let mut out = json!({
        "model": model_summary(t),
        "q_source": q_source,
        "q_form": q_form,
        "certificate": cert,
    });
    if probes.len() <= MAX_FORM_PROBES {
        let form = phi_asymptotic_form(t, &probes, horizon)?;
        if let (Some(r), Some(g)) = (&form.reconstructed, &q_gram) {
            let d = r.matrix().sub(g).max_abs();
            ctx.claim("phi_form.distance_to_q", d, tol);
        }
        out["phi_form"] = json!(form);
    } else {
        ctx.warn(format!("{} probes: polarized form skipped (limit {MAX_FORM_PROBES})", probes.len()));
    }
    Ok(out)
}
