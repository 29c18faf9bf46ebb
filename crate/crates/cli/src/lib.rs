//! Request and report plumbing behind the `asymptotica` binary: operator
//! specs and sequences in, a JSON report and an optional CSV trace out.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use asymptotica::asymptotics::ItemCheck;
use asymptotica::models::{OperatorModel, SupportedVector};
use asymptotica::spec::{parse_operator, parse_probes, OperatorSpec, ProbeSpec};
use serde::Serialize;

mod commands;
mod error;
mod trace;

pub use error::{CliError, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_PRECONDITION};
pub use trace::{emit_trace, read_sequence, Trace};

/// Largest accepted horizon and sequence length.
pub const MAX_HORIZON: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Analyze,
    Envelope,
    Witness,
    Classify,
    Certify,
    GalleryList,
}

#[derive(Clone, Debug)]
pub enum Subject {
    Operator(OperatorModel),
    Sequence(Vec<f64>),
    /// `gallery-list` takes no input.
    Nothing,
}

#[derive(Clone, Debug)]
pub struct AnalysisRequest {
    pub command: Command,
    pub subject: Subject,
    pub tol: Option<f64>,
    pub horizon: Option<usize>,
    pub probes: Option<Vec<SupportedVector>>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

impl AnalysisRequest {
    pub fn new(command: Command, subject: Subject) -> Self {
        AnalysisRequest { command, subject, tol: None, horizon: None, probes: None, seed: 0, out: None, trace: None }
    }

    /// Loads the subject from `spec`: a `.csv` file is a sequence (only for
    /// `envelope`), anything else a JSON operator spec.
    pub fn load(command: Command, spec: Option<&Path>, probes: Option<&Path>) -> Result<Self, CliError> {
        let subject = match (command, spec) {
            (Command::GalleryList, _) => Subject::Nothing,
            (_, None) => return Err(CliError::Request("--spec is required".into())),
            (_, Some(path)) if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) => {
                Subject::Sequence(read_sequence(path)?)
            }
            (_, Some(path)) => Subject::Operator(
                parse_operator(&read(path)?).map_err(|source| CliError::Spec { path: path.to_path_buf(), source })?,
            ),
        };
        let mut req = AnalysisRequest::new(command, subject);
        if let Some(path) = probes {
            req.probes =
                Some(parse_probes(&read(path)?).map_err(|source| CliError::Spec { path: path.to_path_buf(), source })?);
        }
        Ok(req)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Request(m));
        match (&self.subject, self.command) {
            (Subject::Nothing, Command::GalleryList) => {}
            (Subject::Sequence(_), Command::Envelope) => {}
            (Subject::Operator(_), c) if c != Command::GalleryList => {}
            (Subject::Sequence(_), c) => return bad(format!("{} needs an operator spec, not a sequence", c.name())),
            (_, c) => return bad(format!("{} got an unexpected input", c.name())),
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return bad(format!("--tol must be positive and finite, got {tol}"));
            }
        }
        if let Some(h) = self.horizon {
            if h == 0 || h > MAX_HORIZON {
                return bad(format!("--horizon must be in 1..={MAX_HORIZON}, got {h}"));
            }
        }
        if let Subject::Sequence(xs) = &self.subject {
            if xs.len() > MAX_HORIZON {
                return bad(format!("sequence has {} values, at most {MAX_HORIZON} are accepted", xs.len()));
            }
        }
        if let (Some(probes), Subject::Operator(t)) = (&self.probes, &self.subject) {
            if probes.is_empty() {
                return bad("probe list is empty".into());
            }
            if let Some(d) = t.dimension() {
                if let Some(k) = probes.iter().position(|x| x.max_index().is_some_and(|i| i >= d)) {
                    return bad(format!("probe {k} reaches past dimension {d}"));
                }
            }
        }
        Ok(())
    }

    fn echo(&self) -> RequestEcho {
        RequestEcho {
            command: self.command,
            operator: match &self.subject {
                Subject::Operator(t) => Some(OperatorSpec::from_model(t)),
                _ => None,
            },
            sequence_len: match &self.subject {
                Subject::Sequence(xs) => Some(xs.len()),
                _ => None,
            },
            tol: self.tol,
            horizon: self.horizon,
            probes: self.probes.as_ref().map(|ps| ps.iter().map(ProbeSpec::from_vector).collect()),
            seed: self.seed,
        }
    }
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Envelope => "envelope",
            Command::Witness => "witness",
            Command::Classify => "classify",
            Command::Certify => "certify",
            Command::GalleryList => "gallery-list",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RequestEcho {
    pub command: Command,
    pub operator: Option<OperatorSpec>,
    pub sequence_len: Option<usize>,
    pub tol: Option<f64>,
    pub horizon: Option<usize>,
    pub probes: Option<Vec<ProbeSpec>>,
    pub seed: u64,
}

/// A numeric claim with the tolerance it was judged against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub quantity: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub tolerances: BTreeMap<String, f64>,
    pub horizons: BTreeMap<String, usize>,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub request: RequestEcho,
    pub results: serde_json::Value,
    pub item_checks: BTreeMap<String, ItemCheck>,
    pub residuals: Vec<ResidualRow>,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn all_passed(&self) -> bool {
        self.residuals.iter().all(|r| r.passed) && self.item_checks.values().all(|c| c.passed)
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: AnalysisReport,
    pub trace: Option<Trace>,
}

/// Runs one request. The report is a pure function of the request apart
/// from `provenance.timestamp`.
pub fn run(request: &AnalysisRequest) -> Result<Outcome, CliError> {
    request.validate()?;
    let mut ctx = commands::Context::default();
    let results = commands::dispatch(request, &mut ctx)?;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let report = AnalysisReport {
        request: request.echo(),
        results,
        item_checks: ctx.items,
        residuals: ctx.residuals,
        warnings: ctx.warnings,
        provenance: Provenance {
            tool: "asymptotica",
            version: env!("CARGO_PKG_VERSION"),
            seed: request.seed,
            tolerances: ctx.tolerances,
            horizons: ctx.horizons,
            timestamp,
        },
    };
    Ok(Outcome { report, trace: ctx.trace })
}

/// Writes the report to `request.out` (stdout when absent) and the trace to
/// `request.trace`.
pub fn write_outputs(request: &AnalysisRequest, outcome: &Outcome) -> Result<(), CliError> {
    let json = outcome.report.to_json();
    match &request.out {
        Some(path) => {
            std::fs::write(path, json + "\n").map_err(|source| CliError::Io { path: path.clone(), source })?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{json}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    return Err(CliError::Io { path: PathBuf::from("<stdout>"), source: e });
                }
                _ => {}
            }
        }
    }
    if let (Some(path), Some(trace)) = (&request.trace, &outcome.trace) {
        emit_trace(trace, path)?;
    }
    Ok(())
}
