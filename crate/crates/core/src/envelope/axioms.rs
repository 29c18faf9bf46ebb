use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{BoundedSequence, EnvelopeError, EnvelopeEstimate};

#[derive(Clone, Debug)]
pub struct AxiomSuiteConfig {
    pub cases: usize,
    pub len: usize,
    pub seed: u64,
    pub tol: f64,
    /// Slack for order preservation.
    pub order_tol: f64,
}

impl Default for AxiomSuiteConfig {
    fn default() -> Self {
        AxiomSuiteConfig { cases: 50, len: 1 << 14, seed: 0, tol: 1e-9, order_tol: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomViolation {
    pub axiom: String,
    pub case: usize,
    /// How far past the tolerance the check landed.
    pub excess: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AxiomTally {
    pub checked: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub cases: usize,
    pub tolerance: f64,
    pub tallies: BTreeMap<String, AxiomTally>,
    pub violations: Vec<AxiomViolation>,
    /// Estimator failures, by case.
    pub errors: Vec<String>,
    pub linearity: String,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.errors.is_empty()
    }

    /// `slack ≥ 0` means the check holds.
    fn record(&mut self, axiom: &str, case: usize, slack: f64) {
        let tally = self.tallies.entry(axiom.to_string()).or_default();
        tally.checked += 1;
        if !(slack >= 0.0) {
            tally.violations += 1;
            self.violations.push(AxiomViolation { axiom: axiom.to_string(), case, excess: -slack });
        }
    }
}

/// Bounded sequences with a recurring structure: eventually periodic with
/// random transients, sums of two periods, periodic with a geometric
/// modulation, and two-level blocks of doubling length.
fn fuzz_sequence(rng: &mut ChaCha8Rng, len: usize, nonneg: bool) -> Vec<f64> {
    let lo = if nonneg { 0.0 } else { -1.0 };
    let period = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let p = rng.gen_range(1..=12);
        (0..p).map(|_| rng.gen_range(lo..=1.0)).collect()
    };
    let kind = rng.gen_range(0..4);
    let mut xs: Vec<f64> = match kind {
        0 => {
            let p = period(rng);
            let (c, r) = (rng.gen_range(0.0..0.5), rng.gen_range(0.5..0.99));
            let mut xs: Vec<f64> = (0..len).map(|k| p[k % p.len()] + c * f64::powi(r, k.min(100_000) as i32)).collect();
            let transient = rng.gen_range(0..=256).min(len);
            for x in xs.iter_mut().take(transient) {
                *x = rng.gen_range(lo..=1.0);
            }
            xs
        }
        1 => {
            let (p, q) = (period(rng), period(rng));
            (0..len).map(|k| 0.5 * (p[k % p.len()] + q[k % q.len()])).collect()
        }
        2 => {
            let p = period(rng);
            let (c, r) = (rng.gen_range(-0.5..0.5), rng.gen_range(0.5..0.99));
            (0..len).map(|k| p[k % p.len()] * (1.0 + c * f64::powi(r, k.min(100_000) as i32))).collect()
        }
        _ => {
            let (a, b) = (rng.gen_range(lo..=1.0), rng.gen_range(lo..=1.0));
            let mut xs = Vec::with_capacity(len);
            let mut block = 1usize;
            while xs.len() < len {
                for v in [a, b] {
                    xs.extend(std::iter::repeat(v).take(block.min(len - xs.len())));
                }
                block *= 2;
            }
            xs
        }
    };
    if nonneg {
        for x in xs.iter_mut() {
            *x = x.max(0.0);
        }
    }
    xs
}

/// Checks the envelope functionals against the testable Banach-limit
/// axioms on seeded sequences: normalization, the liminf/limsup sandwich,
/// invariance under the backward shift, positivity, order preservation,
/// and sub/super-additivity of `φ₊`/`φ₋`. Linearity is not asserted:
/// `φ₊` and `φ₋` are extremal functionals, not linear ones.
pub fn banach_axiom_suite<F>(estimator: F, config: &AxiomSuiteConfig) -> AxiomReport
where
    F: Fn(&BoundedSequence) -> Result<EnvelopeEstimate, EnvelopeError>,
{
    let tol = config.tol;
    let mut report = AxiomReport {
        cases: config.cases,
        tolerance: tol,
        tallies: BTreeMap::new(),
        violations: Vec::new(),
        errors: Vec::new(),
        linearity: "not asserted: the envelopes are subadditive (upper) and superadditive (lower) only".into(),
    };
    let run = |xs: Vec<f64>| BoundedSequence::from_sample(xs).and_then(|s| estimator(&s));

    match run(vec![1.0; config.len]) {
        Ok(e) => {
            report.record("normalization", 0, tol - (e.phi_minus - 1.0).abs());
            report.record("normalization", 0, tol - (e.phi_plus - 1.0).abs());
        }
        Err(e) => report.errors.push(format!("normalization: {e}")),
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for case in 0..config.cases {
        let xi = fuzz_sequence(&mut rng, config.len, false);
        let eta = fuzz_sequence(&mut rng, config.len, true);
        let by = rng.gen_range(1..=64);
        let floor = xi.iter().copied().fold(f64::INFINITY, f64::min);
        let upsilon: Vec<f64> = xi.iter().zip(&eta).map(|(a, b)| a + b).collect();
        let shifted = xi[by..].to_vec();
        let lifted: Vec<f64> = xi.iter().map(|v| v - floor).collect();
        let results = [xi, eta, upsilon, shifted, lifted].map(run);
        let [e_xi, e_eta, e_ups, e_shift, e_pos] = match results {
            [Ok(a), Ok(b), Ok(c), Ok(d), Ok(e)] => [a, b, c, d, e],
            other => {
                for r in other.iter().filter_map(|r| r.as_ref().err()) {
                    report.errors.push(format!("case {case}: {r}"));
                }
                continue;
            }
        };
        report.record("sandwich", case, e_xi.phi_minus - (e_xi.tail_min - tol));
        report.record("sandwich", case, e_xi.phi_plus + 1e-12 - e_xi.phi_minus);
        report.record("sandwich", case, e_xi.tail_max + tol - e_xi.phi_plus);
        report.record("shift_invariance", case, tol - (e_shift.phi_minus - e_xi.phi_minus).abs());
        report.record("shift_invariance", case, tol - (e_shift.phi_plus - e_xi.phi_plus).abs());
        report.record("positivity", case, e_pos.phi_minus + tol);
        report.record("positivity", case, e_eta.phi_minus + tol);
        report.record("order_preservation", case, e_ups.phi_plus + config.order_tol - e_xi.phi_plus);
        report.record("order_preservation", case, e_ups.phi_minus + config.order_tol - e_xi.phi_minus);
        report.record("subadditivity", case, e_xi.phi_plus + e_eta.phi_plus + tol - e_ups.phi_plus);
        report.record("superadditivity", case, e_ups.phi_minus + tol - e_xi.phi_minus - e_eta.phi_minus);
    }
    report
}
