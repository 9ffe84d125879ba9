use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "asympdiag", version, about = "Asymptotic diagonalisation of matrix families")]
pub struct Cli {
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct TolArgs {
    /// Conditioning limit for eigenvector matrices is 1/tol-eig.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol_eig: f64,
    /// Relative radius for treating eigenvalues as equal.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol_group: f64,
    /// Smallest admissible gap in a Sylvester division.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub sep_min: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand eigenvalues and diagonaliser of a family document.
    Expand(ExpandArgs),
    /// Check an expansion against dense spectra on a grid.
    Verify(VerifyArgs),
    /// Expand the roots of a strictly hyperbolic polynomial along directions.
    Roots(RootsArgs),
    /// Integrate an ODE family asymptotically and compare with a reference.
    Integrate(IntegrateArgs),
    /// Damped thermo-elastic model.
    Thermo(ThermoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Standard scheme when the leading eigenvalues are distinct, block
    /// scheme otherwise.
    Auto,
    Standard,
    Block,
    /// Block scheme with full block elimination after every level.
    Remark23,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    /// Family document, or `-` for stdin.
    pub file: PathBuf,
    #[arg(long, short = 'N', default_value_t = 2)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    pub mode: Mode,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
    #[arg(long, short = 'N', default_value_t = 2)]
    pub order: usize,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    pub mode: Mode,
    /// `lo:hi:count`, log-spaced; defaults to nine points from 2^-10 to 2^-2.
    #[arg(long)]
    pub grid: Option<String>,
    /// Verify this `expand` report instead of recomputing the expansion.
    #[arg(long)]
    pub expansion: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    /// Polynomial document, or `-` for stdin.
    pub file: PathBuf,
    /// Number of sampled unit directions.
    #[arg(long, default_value_t = 8)]
    pub directions: usize,
    /// Highest correction index K in the root expansions.
    #[arg(long, short = 'K', default_value_t = 2)]
    pub order: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QMode {
    Volterra,
    Picard,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    /// ODE document, or `-` for stdin.
    pub file: PathBuf,
    /// Base time; overrides the document's `t0`.
    #[arg(long)]
    pub t0: Option<f64>,
    /// End time.
    #[arg(long = "T", value_name = "T")]
    pub t_end: f64,
    #[arg(long, short = 'N', default_value_t = 2)]
    pub order: usize,
    /// Initial value at t0, comma separated complex numbers such as `1,0.5-2i`.
    #[arg(long)]
    pub v0: String,
    #[arg(long, default_value_t = 25)]
    pub samples: usize,
    #[arg(long, value_enum, default_value_t = QMode::Volterra)]
    pub q_mode: QMode,
    /// Iteration depth for `--q-mode picard`.
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    /// Relative tolerance of the reference integrator.
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Also write a JSON summary (Liouville check, bounds) here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Regime {
    Small,
    Large,
    Signs,
}

#[derive(Debug, Args)]
pub struct ThermoArgs {
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, value_enum, default_value_t = Regime::Small)]
    pub regime: Regime,
    #[arg(long, short = 'N', default_value_t = 2)]
    pub order: usize,
    /// Print the family document A(xi) and exit.
    #[arg(long)]
    pub emit_doc: bool,
    /// Sweep range and size for `--regime signs`.
    #[arg(long, default_value_t = 0.01)]
    pub xi_min: f64,
    #[arg(long, default_value_t = 100.0)]
    pub xi_max: f64,
    #[arg(long, default_value_t = 60)]
    pub points: usize,
    /// Write `xi,branch,re,im` rows of the sweep here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
