mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Continuous iteration of analytic maps through truncated Carleman matrices.
#[derive(Debug, Parser)]
#[command(name = "carleman", version)]
pub struct Cli {
    /// File of `key=value` lines supplying defaults for any flag of the
    /// chosen subcommand; flags given on the command line take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the truncated Carleman matrix of a map.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Matrix(MatrixArgs),
    /// Evaluate continuous iterates f^t(x) over a (t, x) lattice.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Iterate(IterateArgs),
    /// Print the linearizing chart (or the full factorization) at a fixed point.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Chart(ChartArgs),
    /// Print the generating vector field, as coefficients or at points.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Field(FieldArgs),
    /// Integrate dx/dt = G(x) with classical Runge-Kutta.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Integrate(IntegrateArgs),
    /// Lyapunov exponent of x -> 4x(1-x) along an orbit.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Lyapunov(LyapunovArgs),
    /// Run a verification suite and report each check.
    #[command(args_override_self = true, allow_negative_numbers = true)]
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format (default depends on the subcommand).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "map", required = true, multiple = false)]
pub struct MapArgs {
    /// Named map, e.g. `logistic:4`.
    #[arg(long)]
    pub preset: Option<String>,
    /// Map coefficients, lowest degree first, e.g. `0,4,-4` or `0,1+2i`.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
}

#[derive(Debug, Args)]
pub struct DimArgs {
    /// Truncation order N of series and matrices.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(4..=512))]
    pub dim: u64,
}

#[derive(Debug, Args)]
pub struct LocalArgs {
    /// Starting point for the fixed-point search (complex, e.g. `0.7` or `0.7+0.1i`).
    #[arg(long, visible_alias = "fixed-point", default_value = "0", allow_hyphen_values = true)]
    pub guess: String,
    /// Chart radius about the fixed point (default: a tenth of the distance
    /// to the nearest other fixed point).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Relative size of trailing series terms tolerated before a sum is
    /// reported as non-convergent.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Matrix dimension N.
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(2..=512))]
    pub dim: u64,
    /// Also build the matrix by quadrature and report the deviation.
    #[arg(long)]
    pub check_quadrature: bool,
    /// Quadrature nodes (default: 4·N·degree).
    #[arg(long)]
    pub nodes: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct IterateArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub dim: DimArgs,
    #[command(flatten)]
    pub local: LocalArgs,
    /// Iteration times, comma separated.
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    pub t: Vec<f64>,
    /// Evaluation points, comma separated.
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    pub x: Vec<f64>,
    /// Carry points outside the chart into it with the map itself.
    #[arg(long)]
    pub extend: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ChartArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub dim: DimArgs,
    #[command(flatten)]
    pub local: LocalArgs,
    /// Dump the factorization blocks V, V_inv and diag instead.
    #[arg(long)]
    pub factorization: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub dim: DimArgs,
    #[command(flatten)]
    pub local: LocalArgs,
    /// Evaluate the field at these points instead of listing coefficients.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub x: Vec<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub dim: DimArgs,
    #[command(flatten)]
    pub local: LocalArgs,
    /// Initial point (complex).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: String,
    /// Final time.
    #[arg(long)]
    pub t_end: f64,
    /// Step size.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    /// Number of iterates.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    /// Initial point in (0, 1).
    #[arg(long, default_value_t = 0.123456)]
    pub x0: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SuiteName {
    Logistic4,
    Mu2,
    Semigroup,
    Lyapunov,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub suite: SuiteName,
    /// Matrix dimension for the semigroup suite.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(4..=512))]
    pub dim: u64,
    /// Orbit length for the Lyapunov suite.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args_os().collect()) {
        Ok(args) => args,
        Err(failure) => return failure.report(),
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => return output::Failure::from_clap(&e).report(),
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => failure.report(),
    }
}
