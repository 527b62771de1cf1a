mod args;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use args::{AngleSpec, FamilyArgs, Format, Range, RequiredOrder, Source};
use zpulse::{Axis, FamilyId};

#[derive(Debug, Parser)]
#[command(
    name = "zpulse",
    version,
    about = "Build, verify and analyse composite z-rotation pulse sequences"
)]
struct Cli {
    /// Directory that relative `--out` paths are written into.
    #[arg(long, env = "ZPULSE_OUT_DIR", global = true)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Show every family with its pulse count and claimed orders.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Emit a family's pulse sequence as JSON.
    Build {
        #[arg(long)]
        family: FamilyId,
        #[arg(long, allow_hyphen_values = true)]
        phi: AngleSpec,
        #[command(flatten)]
        params: FamilyArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check closure and cancellation conditions; exit 1 if a required order fails.
    Verify {
        #[command(flatten)]
        source: Source,
        /// Residual tolerance for the algebraic conditions.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Orders to require instead of the family's claim: `N` or `PSE,ORE`.
        #[arg(long)]
        require_order: Option<RequiredOrder>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Sample the fidelity on an (epsilon, f) grid.
    Scan {
        #[command(flatten)]
        source: Source,
        /// Points per axis.
        #[arg(long, default_value_t = 201)]
        grid: usize,
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        eps_range: Range,
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        f_range: Range,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the infidelity order along one error axis.
    Order {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        axis: Axis,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Rank families by time cost and corrected order.
    Compare {
        /// Families to compare; all buildable ones when omitted.
        #[arg(long = "family")]
        families: Vec<FamilyId>,
        #[arg(long, allow_hyphen_values = true)]
        phi: AngleSpec,
        #[command(flatten)]
        params: FamilyArgs,
        /// Add rows with published time costs of other constructions.
        #[arg(long)]
        informational: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(commands::Status::Passed) => ExitCode::SUCCESS,
        Ok(commands::Status::Failed) => ExitCode::from(1),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    use std::io::ErrorKind::BrokenPipe;
    e.chain().any(|cause| {
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            return io.kind() == BrokenPipe;
        }
        match cause.downcast_ref::<csv::Error>().map(csv::Error::kind) {
            Some(csv::ErrorKind::Io(io)) => io.kind() == BrokenPipe,
            _ => false,
        }
    })
}
