use std::path::PathBuf;
use std::process::ExitCode;

use asymptotica_cli::{run, write_outputs, AnalysisRequest, CliError, Command};
use clap::{Args, Parser, Subcommand};

/// Asymptotic limits, Cesaro means and Banach-limit envelopes of operators.
#[derive(Parser)]
#[command(name = "asymptotica", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify, compute the Cesaro and contraction limits, and check their properties.
    Analyze(Opts),
    /// Lower and upper Banach-limit envelopes of a CSV sequence or of operator orbits.
    Envelope(Opts),
    /// Similarity to a unitary through the square root of the Cesaro limit.
    Witness(Opts),
    /// Power boundedness and stability verdicts.
    Classify(Opts),
    /// Certificate that every Banach limit gives the Cesaro limit on the probes.
    Certify(Opts),
    /// List the built-in example operators.
    GalleryList(ListOpts),
}

#[derive(Args)]
struct Opts {
    /// Operator spec (JSON), or a sequence (.csv, one value per line) for `envelope`.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    /// JSON list of probe vectors `{"support": [...], "amplitudes": [[re, im], ...]}`.
    #[arg(long)]
    probes: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV trace path.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ListOpts {
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("ASYMPTOTICA_THREADS") else { return Ok(()) };
    let threads: usize =
        value.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Request(format!("ASYMPTOTICA_THREADS must be a positive integer, got '{value}'"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Request(format!("thread pool: {e}")))
}

fn request(cmd: Cmd) -> Result<AnalysisRequest, CliError> {
    let (command, opts) = match cmd {
        Cmd::Analyze(o) => (Command::Analyze, o),
        Cmd::Envelope(o) => (Command::Envelope, o),
        Cmd::Witness(o) => (Command::Witness, o),
        Cmd::Classify(o) => (Command::Classify, o),
        Cmd::Certify(o) => (Command::Certify, o),
        Cmd::GalleryList(o) => {
            let mut req = AnalysisRequest::load(Command::GalleryList, None, None)?;
            req.out = o.out;
            return Ok(req);
        }
    };
    let mut req = AnalysisRequest::load(command, Some(&opts.spec), opts.probes.as_deref())?;
    req.tol = opts.tol;
    req.horizon = opts.horizon;
    req.seed = opts.seed;
    req.out = opts.out;
    req.trace = opts.trace;
    Ok(req)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| request(cli.command)).and_then(|req| {
        let outcome = run(&req)?;
        write_outputs(&req, &outcome)?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            for w in &outcome.report.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
