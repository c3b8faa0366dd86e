use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "jumpclust",
    version,
    about = "Test price paths for jumps by clustering their increments"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for simulation and Monte Carlo (also read from SEED).
    #[arg(long, global = true, env = "SEED")]
    pub seed: Option<u64>,

    /// Test level [default: 0.05].
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    /// How prices become increments [default: log-diff].
    #[arg(long, global = true, value_enum)]
    pub transform: Option<TransformArg>,

    /// Quantile-slope estimator: `auto`, `single`, or a window half-width.
    #[arg(long, global = true)]
    pub slope: Option<String>,

    /// Worker threads for Monte Carlo (0 = all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Write output here instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    RawDiff,
    LogDiff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long, short)]
    pub input: Option<PathBuf>,

    /// Name of the date column [default: date].
    #[arg(long)]
    pub date_column: Option<String>,

    /// Read rows in file order without a date column.
    #[arg(long, conflicts_with = "date_column")]
    pub no_date_column: bool,

    /// Name of the price column [default: value].
    #[arg(long)]
    pub value_column: Option<String>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// TOML experiment plan.
    #[arg(long)]
    pub plan: Option<PathBuf>,

    /// Override the plan's replication count.
    #[arg(long)]
    pub replications: Option<usize>,

    #[arg(long, value_enum, default_value_t)]
    pub format: Format,

    /// Include per-replication records.
    #[arg(long)]
    pub records: bool,

    /// Include wall-clock runtimes (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the jump test on a price series and print the result as JSON.
    Test(InputArgs),
    /// Write the empirical cross-over function as CSV.
    Ecf(InputArgs),
    /// Simulate a path from a model and write it as CSV.
    Simulate {
        /// TOML model file (`mu`, `sigma`, `n`, optional `x0` and `[jumps]`);
        /// defaults to the `[model]` table of the run configuration.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Level study over jump-free cells.
    McLevel(PlanArgs),
    /// Power study, reported as failure proportions.
    McPower(PlanArgs),
    /// Power curve over a varied jump-size parameter.
    PowerCurve(PlanArgs),
    /// Power-variation ratio test.
    StTest {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
}
