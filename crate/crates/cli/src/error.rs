use std::path::PathBuf;

use asymptotica::asymptotics::AsymptoticsError;
use asymptotica::envelope::EnvelopeError;
use asymptotica::linalg::LinalgError;
use asymptotica::models::ModelError;
use asymptotica::spec::SpecError;
use asymptotica::witness::WitnessError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", .path.display())]
    Spec { path: PathBuf, source: SpecError },
    #[error("{}, line {line}: {message}", .path.display())]
    Sequence { path: PathBuf, line: u64, message: String },
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid request: {0}")]
    Request(String),
    #[error("models: {0}")]
    Model(#[from] ModelError),
    #[error("linalg: {0}")]
    Linalg(#[from] LinalgError),
    #[error("asymptotics: {0}")]
    Asymptotics(#[from] AsymptoticsError),
    #[error("envelope: {0}")]
    Envelope(#[from] EnvelopeError),
    #[error("witness: {0}")]
    Witness(#[from] WitnessError),
}

fn linalg_code(e: &LinalgError) -> i32 {
    match e {
        LinalgError::NoConvergence { .. } => EXIT_NOT_CONVERGED,
        _ => EXIT_PRECONDITION,
    }
}

fn asymptotics_code(e: &AsymptoticsError) -> i32 {
    match e {
        AsymptoticsError::NotConverged { .. }
        | AsymptoticsError::SlowConvergence { .. }
        | AsymptoticsError::Oscillating { .. } => EXIT_NOT_CONVERGED,
        AsymptoticsError::Linalg(e) => linalg_code(e),
        _ => EXIT_PRECONDITION,
    }
}

impl CliError {
    /// 2 for bad input or a failed precondition, 3 when a numerical method
    /// did not settle.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Linalg(e) => linalg_code(e),
            CliError::Asymptotics(e) => asymptotics_code(e),
            CliError::Envelope(e) => match e {
                EnvelopeError::Inconclusive { .. } => EXIT_NOT_CONVERGED,
                EnvelopeError::Linalg(e) => linalg_code(e),
                EnvelopeError::Asymptotics(e) => asymptotics_code(e),
                _ => EXIT_PRECONDITION,
            },
            CliError::Witness(e) => match e {
                WitnessError::ResidualTooLarge { .. } | WitnessError::WitnessDegraded { .. } => EXIT_NOT_CONVERGED,
                WitnessError::Linalg(e) => linalg_code(e),
                WitnessError::Asymptotics(e) => asymptotics_code(e),
                _ => EXIT_PRECONDITION,
            },
            CliError::Spec { .. }
            | CliError::Sequence { .. }
            | CliError::Io { .. }
            | CliError::Request(_)
            | CliError::Model(_) => EXIT_PRECONDITION,
        }
    }
}
