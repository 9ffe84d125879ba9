//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the exit code together with everything that
//! should be written to stdout and stderr.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use asympdiag::Error;
use clap::Parser;
use serde::Serialize;

pub mod args;
mod commands;
pub mod report;

pub use args::Cli;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSUMPTION: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

/// What a command produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    /// Assumption failure detected outside the block scheme (a defective
    /// leading coefficient in the standard scheme).
    Assumption { level: usize, message: String },
    Input(String),
    Output(String),
    /// A check failed; `report` is the full report to print.
    Verification { first: String, report: String },
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::AssumptionFailure(_) | Error::DegenerateLeading { .. } | Error::NotStrictlyHyperbolic { .. } => {
            EXIT_ASSUMPTION
        }
        Error::InvalidInput(_)
        | Error::DimensionMismatch { .. }
        | Error::TooLarge(_)
        | Error::DegreeViolation { .. }
        | Error::NotNormalised { .. }
        | Error::InvalidParams(_)
        | Error::InsufficientGrid { .. } => EXIT_INPUT,
        _ => EXIT_NUMERIC,
    }
}

#[derive(Serialize)]
struct ErrorReport {
    error: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    defect: Option<(asympdiag::C64, usize, usize)>,
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Core(e) => exit_code(e),
            CliError::Assumption { .. } => EXIT_ASSUMPTION,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Output(_) => EXIT_NUMERIC,
            CliError::Verification { .. } => EXIT_VERIFY,
        }
    }

    fn into_outcome(self) -> Outcome {
        let code = self.code();
        let (stdout, stderr) = match self {
            CliError::Verification { first, report } => (report, format!("error: verification failed: {first}\n")),
            CliError::Assumption { level, message } => {
                let r = ErrorReport {
                    error: "assumption_failure",
                    message: message.clone(),
                    level: Some(level),
                    defect: None,
                };
                (to_json(&r), format!("error: assumption failure at level k={level}: {message}\n"))
            }
            CliError::Core(Error::AssumptionFailure(p)) => {
                let message = Error::AssumptionFailure(p.clone()).to_string();
                let r = ErrorReport {
                    error: "assumption_failure",
                    message: message.clone(),
                    level: Some(p.level),
                    defect: p.defect,
                };
                (to_json(&r), format!("error: assumption failure at level k={}: {message}\n", p.level))
            }
            CliError::Core(e) => {
                let kind = match exit_code(&e) {
                    EXIT_ASSUMPTION => "assumption_failure",
                    EXIT_INPUT => "input_error",
                    _ => "numeric_failure",
                };
                let r = ErrorReport {
                    error: kind,
                    message: e.to_string(),
                    level: None,
                    defect: None,
                };
                (to_json(&r), format!("error: {e}\n"))
            }
            CliError::Input(m) => {
                let r = ErrorReport {
                    error: "input_error",
                    message: m.clone(),
                    level: None,
                    defect: None,
                };
                (to_json(&r), format!("error: {m}\n"))
            }
            CliError::Output(m) => (String::new(), format!("error: {m}\n")),
        };
        Outcome { code, stdout, stderr }
    }
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = asympdiag::document::to_json_pretty(value);
    s.push('\n');
    s
}

pub(crate) fn read_input(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Input(format!("reading stdin: {e}")))?;
        Ok(s)
    } else {
        fs::read_to_string(path).map_err(|e| CliError::Input(format!("reading {}: {e}", path.display())))
    }
}

/// Sends `text` to `path` if given, otherwise returns it for stdout.
pub(crate) fn emit(text: String, path: &Option<PathBuf>) -> Result<String, CliError> {
    match path {
        Some(p) => {
            fs::write(p, text).map_err(|e| CliError::Output(format!("writing {}: {e}", p.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

/// Applies `ASYMPDIAG_THREADS` to the global thread pool. Later calls are
/// no-ops once the pool exists.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ASYMPDIAG_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("ASYMPDIAG_THREADS must be a positive integer, got {raw:?}")))?;
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    if let Err(e) = configure_threads() {
        return e.into_outcome();
    }
    match commands::dispatch(&cli) {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(e) => e.into_outcome(),
    }
}
