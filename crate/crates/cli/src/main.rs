//! `translab`: command-line front end for translator experiments.
//!
//! Exit codes: 0 ok, 1 a requested property failed or the data is not a translator,
//! 2 bad input, 3 numerical failure.

mod commands;
mod curvature_arg;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "translab", version, about = "Numerical lab for translating solitons of curvature flows")]
struct Cli {
    /// Directory receiving the CSV and JSON artifacts.
    #[arg(long, short = 'o', global = true, default_value = ".")]
    out_dir: PathBuf,

    /// Form of the summary printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = SummaryFormat::Text)]
    summary: SummaryFormat,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SummaryFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Structural properties of a curvature function.
    Gamma {
        #[command(subcommand)]
        action: GammaAction,
    },
    /// Samples a Grim Reaper cylinder and checks the translator equation.
    Grim(GrimArgs),
    /// Shoots the rotationally symmetric translator and writes profile and patch CSVs.
    Bowl(BowlArgs),
    /// Evolves a graph by the curvature flow.
    Flow(FlowArgs),
    /// Pointwise translator residual γ(λ) − ⟨ν, e_{n+1}⟩ of a patch.
    Residual(PatchArgs),
    /// Residual of the linearized identity satisfied by γ on translators.
    Identity(IdentityArgs),
    /// Every diagnostic field and the convex/cylindrical verdict.
    Diagnose(DiagnoseArgs),
}

#[derive(Debug, Subcommand)]
enum GammaAction {
    Check(GammaCheckArgs),
}

#[derive(Debug, Args)]
struct GammaCheckArgs {
    /// JSON object or shorthand (mean, gauss, sigma<k>, power<p>).
    spec: String,
    /// Exit 1 unless this property holds; repeatable.
    #[arg(long = "require")]
    required: Vec<String>,
    /// Dimension for shorthands.
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = translab::curvature::DEFAULT_SAMPLE_COUNT)]
    samples: usize,
    #[arg(long, default_value_t = translab::curvature::DEFAULT_SEED)]
    seed: u64,
}

#[derive(Debug, Args)]
struct GrimArgs {
    /// Slab width ω ≥ π.
    #[arg(long, default_value_t = PI)]
    omega: f64,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Nodes across the slab.
    #[arg(long, default_value_t = 201)]
    res: usize,
    /// Nodes along each cylinder axis.
    #[arg(long, default_value_t = 9)]
    cylinder_points: usize,
    #[arg(long, default_value = "mean")]
    spec: String,
}

#[derive(Debug, Args)]
struct BowlArgs {
    #[arg(long, default_value = "mean")]
    spec: String,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 20.0)]
    r_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Half-width of the square patch written next to the profile.
    #[arg(long, default_value_t = 1.5)]
    patch_extent: f64,
    #[arg(long, default_value_t = 0.05)]
    patch_h: f64,
}

#[derive(Debug, Args)]
struct FlowArgs {
    /// Start from the exact Grim Reaper, with boundary pinned to its translate.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    grim: bool,
    /// Start from a patch CSV, with frozen boundary.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = PI)]
    omega: f64,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Grid spacing of the Grim Reaper start.
    #[arg(long, default_value_t = PI / 400.0)]
    h: f64,
    /// Final time.
    #[arg(long = "T", default_value_t = 0.1)]
    final_time: f64,
    /// CFL safety factor in (0, 1].
    #[arg(long, default_value_t = 0.5, conflicts_with = "dt")]
    cfl: f64,
    /// Fixed time step instead of the CFL rule.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long, default_value = "mean")]
    spec: String,
}

#[derive(Debug, Args)]
struct PatchArgs {
    /// Patch CSV with columns x1..xn,u.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "mean")]
    spec: String,
    /// Exit 1 if the max residual exceeds this.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct IdentityArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "mean")]
    spec: String,
    /// Translator residual accepted before the identity is evaluated.
    #[arg(long, default_value_t = translab::diagnostics::DEFAULT_TRANSLATOR_TOLERANCE)]
    tolerance: f64,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "mean")]
    spec: String,
    #[arg(long)]
    residual_tolerance: Option<f64>,
    /// Eigenvalue threshold separating positive from vanishing.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("required properties failed: {}", .0.join(", "))]
    PropertyFailed(Vec<String>),
    #[error(transparent)]
    Core(#[from] translab::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::PropertyFailed(_) | CliError::Core(translab::Error::NotATranslator { .. }) => 1,
            CliError::Core(e) if e.is_numerical_failure() => 3,
            CliError::Core(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(&cli) {
        Ok(summary) => {
            match cli.summary {
                SummaryFormat::Text => println!("{}", summary.text),
                SummaryFormat::Json => println!("{}", summary.record),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("translab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
