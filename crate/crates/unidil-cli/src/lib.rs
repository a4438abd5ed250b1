//! Command-line front end for the `unidil` library.
//!
//! Each invocation runs exactly one subcommand, prints one JSON record per
//! computed quantity to standard output, and exits 0 on success, 2 on a
//! usage problem, 3 on a failed certificate or audit, and 4 on an exceeded
//! resource cap. Results can additionally be duplicated to a JSON-lines
//! file (`--out`) and summarized as CSV (`--csv`).
//!
//! Reruns with identical flags and seed reproduce `value` and
//! `error_bound` bit-for-bit: every random draw is keyed by the seed, and
//! all parallel reductions are order-independent. The worker-thread count
//! comes from the `UNIDIL_THREADS` environment variable (default: all
//! available cores) and affects only wall-clock time, never values.

use std::ffi::OsString;
use std::sync::Once;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

mod commands;
mod record;
pub mod theta_file;

pub use record::{ResultRecord, ARTIFACT_VERSION};

use commands::*;
use record::RecordSink;

/// Name of the environment variable fixing the worker-thread count.
pub const THREADS_ENV: &str = "UNIDIL_THREADS";

/// Process exit codes, also available as constants for scripting against.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const FAILED_CERTIFICATE: i32 = 3;
    pub const RESOURCE_CAP: i32 = 4;
}

/// Error carrying its exit class.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, parameters, or input files — exit 2.
    #[error("{0}")]
    Usage(String),
    /// The requested certificate, proof, or audit did not hold — exit 3.
    #[error("{0}")]
    Certificate(String),
    /// A dimension or budget cap was exceeded — exit 4.
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit_code::USAGE,
            CliError::Certificate(_) => exit_code::FAILED_CERTIFICATE,
            CliError::Resource(_) => exit_code::RESOURCE_CAP,
        }
    }
}

/// What a finished invocation produced: the exit code and the records that
/// were emitted (also already printed as JSON lines).
#[derive(Debug)]
pub struct CommandOutcome {
    pub exit_code: i32,
    pub records: Vec<ResultRecord>,
}

impl CommandOutcome {
    fn failed(code: i32) -> Self {
        Self { exit_code: code, records: Vec::new() }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "unidil",
    version,
    about = "Certified dilation constants, operator norms, and metric quantities \
             for tuples of unitaries"
)]
struct Cli {
    /// Duplicate the JSON records to this file
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<std::path::PathBuf>,
    /// Write a CSV summary to this file
    #[arg(long, global = true, value_name = "FILE")]
    csv: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dilation constant at a constant rational angle
    Ctheta(CthetaArgs),
    /// Dilation constant for an angle matrix from a file
    CthetaGeneral(CthetaGeneralArgs),
    /// Certified three-generator lower bound
    C3Bound(C3BoundArgs),
    /// Closed-form reference constants
    Constants(ConstantsArgs),
    /// Sampled free-model operator norms
    FreeNorms(FreeNormsArgs),
    /// Spectral-law and norm checks for Haar pairs
    Arcsine(ArcsineArgs),
    /// Coefficient-norm inequality audit
    Lehner(LehnerArgs),
    /// Search for extremal free-to-commuting norm ratios
    Cf0Search(Cf0SearchArgs),
    /// Weyl-family compression audit over random angle pairs
    WeylVerify(WeylVerifyArgs),
    /// Vector-system construction and identity defects
    Vectors(VectorsArgs),
    /// Range-distance inequality audit
    MrangeAudit(MrangeAuditArgs),
    /// Certified Euclidean ball inside a level-1 range
    L1Ball(L1BallArgs),
    /// Hölder extension of a grid path
    ExtendPath(ExtendPathArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ctheta(_) => "ctheta",
            Command::CthetaGeneral(_) => "ctheta-general",
            Command::C3Bound(_) => "c3-bound",
            Command::Constants(_) => "constants",
            Command::FreeNorms(_) => "free-norms",
            Command::Arcsine(_) => "arcsine",
            Command::Lehner(_) => "lehner",
            Command::Cf0Search(_) => "cf0-search",
            Command::WeylVerify(_) => "weyl-verify",
            Command::Vectors(_) => "vectors",
            Command::MrangeAudit(_) => "mrange-audit",
            Command::L1Ball(_) => "l1-ball",
            Command::ExtendPath(_) => "extend-path",
        }
    }

    fn run(&self) -> Result<commands::CommandOutput, CliError> {
        match self {
            Command::Ctheta(a) => ctheta(a),
            Command::CthetaGeneral(a) => ctheta_general(a),
            Command::C3Bound(a) => c3_bound(a),
            Command::Constants(a) => constants(a),
            Command::FreeNorms(a) => free_norms(a),
            Command::Arcsine(a) => arcsine(a),
            Command::Lehner(a) => lehner(a),
            Command::Cf0Search(a) => cf0_search(a),
            Command::WeylVerify(a) => weyl_verify(a),
            Command::Vectors(a) => vectors(a),
            Command::MrangeAudit(a) => mrange_audit(a),
            Command::L1Ball(a) => l1_ball(a),
            Command::ExtendPath(a) => extend_path(a),
        }
    }
}

/// Builds the global thread pool from [`THREADS_ENV`] once per process.
/// Later calls (and later in-process invocations) keep the first pool.
fn init_thread_pool() -> Result<(), CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(text) => match text.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Some(n),
            _ => {
                return Err(CliError::Usage(format!(
                    "{THREADS_ENV} must be a positive integer, found `{text}`"
                )))
            }
        },
        Err(_) => None,
    };
    static INIT: Once = Once::new();
    INIT.call_once(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = threads {
            builder = builder.num_threads(n);
        }
        // An already-built pool (possible only in-process, never in the
        // one-command binary) is kept.
        let _ = builder.build_global();
    });
    Ok(())
}

/// Parses `argv` (including the program name), runs the selected command,
/// emits its records, and returns the exit code together with the records.
pub fn run_command<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit_code::OK,
                _ => exit_code::USAGE,
            };
            // Help and version go to stdout, errors to stderr; clap's
            // Display handles both.
            e.print().ok();
            return CommandOutcome::failed(code);
        }
    };
    if let Err(e) = init_thread_pool() {
        eprintln!("error: {e}");
        return CommandOutcome::failed(e.exit_code());
    }

    let started = Instant::now();
    let output = match cli.command.run() {
        Ok(output) => output,
        Err(e) => {
            eprintln!("error: {e}");
            return CommandOutcome::failed(e.exit_code());
        }
    };
    let runtime_ms = started.elapsed().as_millis() as u64;

    for warning in &output.warnings {
        eprintln!("warning: {warning}");
    }

    let mut sink = match RecordSink::create(cli.out.as_deref(), cli.csv.as_deref()) {
        Ok(sink) => sink,
        Err(e) => {
            eprintln!("error: {e}");
            return CommandOutcome::failed(e.exit_code());
        }
    };
    let timestamp = record::now_iso8601();
    let records: Vec<ResultRecord> = output
        .drafts
        .into_iter()
        .map(|draft| draft.stamp(cli.command.name(), runtime_ms, &timestamp))
        .collect();
    for rec in &records {
        if let Err(e) = sink.emit(rec) {
            eprintln!("error: {e}");
            return CommandOutcome { exit_code: e.exit_code(), records };
        }
    }
    if let Err(e) = sink.finish() {
        eprintln!("error: {e}");
        return CommandOutcome { exit_code: e.exit_code(), records };
    }

    match output.failure {
        Some(e) => {
            eprintln!("error: {e}");
            CommandOutcome { exit_code: e.exit_code(), records }
        }
        None => CommandOutcome { exit_code: exit_code::OK, records },
    }
}
