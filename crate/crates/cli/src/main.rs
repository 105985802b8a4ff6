use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod analyze;
mod corpus;
mod verify;

#[derive(Parser, Debug)]
#[command(name = "sublab", version, about = "Classify Riemannian submersions from flat Kähler space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify one map and run residual checks.
    Analyze(AnalyzeArgs),
    /// Run the builtin corpus against its expected values.
    Verify(VerifyArgs),
    /// List the builtin fixtures.
    Corpus,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Points {
    Random,
    Grid,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["map", "example"]))]
pub struct AnalyzeArgs {
    /// Map definition file.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Builtin fixture name (see `sublab corpus`).
    #[arg(long)]
    example: Option<String>,
    /// Parameter binding, repeatable.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
    /// `standard`, or a file with m rows of m reals.
    #[arg(long = "J", value_name = "standard|FILE", default_value = "standard")]
    j: String,
    #[arg(long, value_enum, default_value_t = Points::Random)]
    points: Points,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    tol_rank: Option<f64>,
    #[arg(long)]
    tol_cluster: Option<f64>,
    #[arg(long)]
    tol_angle: Option<f64>,
    /// Check to run, repeatable; `all` runs every check.
    #[arg(long = "check", value_name = "NAME|all")]
    checks: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Restrict to one fixture.
    #[arg(long)]
    example: Option<String>,
    /// Parameter sweep `k=a:b:step`, repeatable; needs --example.
    #[arg(long = "sweep", value_name = "K=A:B:STEP", num_args = 1..)]
    sweeps: Vec<String>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Sample points per fixture or sweep cell.
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long)]
    tol_cluster: Option<f64>,
}

/// Check failures exit with 2, usage and IO errors with 1.
pub const EXIT_CHECK_FAILURE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => analyze::run(&a),
        Command::Verify(v) => verify::run(&v),
        Command::Corpus => corpus::run(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILURE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
