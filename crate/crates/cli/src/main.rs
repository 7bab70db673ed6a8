//! `amalgam`: batch runs over a composition table.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical degeneracy.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use amalgam_core::CodaError;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "amalgam", version, about = "Logratio variance, amalgamation logratios and stepwise selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Total logratio variance and zero-replacement summary.
    Variance(Common),
    /// Stepwise selection from a candidate list, or the trace of a hierarchy's committed logratios.
    Select(SelectArgs),
    /// Ordination coordinates: logratio analysis, PCA of logratios or ternary.
    Ordinate(OrdinateArgs),
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Composition table (CSV with header row).
    #[arg(long)]
    input: PathBuf,
    /// Group-factor column; `none` treats every column as a part. Detected when omitted.
    #[arg(long)]
    label_col: Option<String>,
    /// Row-sum constant after zero replacement.
    #[arg(long, default_value_t = 1.0)]
    closure: f64,
    /// `uniform`, `mean`, `size` (amalgamation size) or a `part,weight` CSV file.
    #[arg(long, default_value = "uniform")]
    weights: String,
    /// Amalgamation hierarchy document (JSON).
    #[arg(long)]
    hierarchy: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, default_value = "amalgam-out")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    common: Common,
    /// Candidate logratios, one `num/den` per line (`+` joins names), or `all`.
    #[arg(long)]
    candidates: Option<String>,
    /// Maximum number of steps; defaults to the number of parts minus one.
    #[arg(long)]
    steps: Option<usize>,
    /// Stop when the best increment (percentage points) is below this.
    #[arg(long, default_value_t = 0.0)]
    floor: f64,
}

#[derive(Debug, Args)]
pub struct OrdinateArgs {
    #[command(flatten)]
    common: Common,
    /// `lra`, `pca-slr` or `ternary`.
    #[arg(long, default_value = "lra")]
    mode: String,
    /// `parts`, `roots` or a comma-separated list of amalgamations.
    #[arg(long, default_value = "parts")]
    target: String,
    /// Logratios for `pca-slr`; the hierarchy's committed logratios when omitted.
    #[arg(long)]
    candidates: Option<String>,
    /// Standardize logratios before PCA.
    #[arg(long)]
    standardize: bool,
    /// Put the singular values on the variables instead of the samples.
    #[arg(long)]
    column_principal: bool,
}

fn exit_code(err: &CodaError) -> u8 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Variance(args) => commands::variance(&args),
        Command::Select(args) => commands::select(&args),
        Command::Ordinate(args) => commands::ordinate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
