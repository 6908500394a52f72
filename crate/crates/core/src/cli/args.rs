use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "shearwave", version, about = "Solitary waves on shear flows")]
pub struct Cli {
    /// JSON file with `solve`, `continue`, `sturm` and `thresholds` sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Format of the data file written by `shear` and `sturm`.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upstream quantities of a shear profile.
    Shear { profile: PathBuf },
    /// Solve for solitary waves, one per profile.
    Solve(SolveArgs),
    /// Diagnostics report for a wave file.
    Verify { wave: PathBuf },
    /// Trace a branch of waves along a one-parameter family.
    Continue(ContinueArgs),
    /// Decay-rate eigenproblem of a profile.
    Sturm {
        profile: PathBuf,
        #[arg(long)]
        np: Option<usize>,
        /// Number of eigenvalues.
        #[arg(long, default_value_t = 2)]
        count: usize,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(required = true)]
    pub profiles: Vec<PathBuf>,
    #[arg(long)]
    pub np: Option<usize>,
    #[arg(long)]
    pub nq: Option<usize>,
    #[arg(long)]
    pub half_length: Option<f64>,
    #[arg(long)]
    pub length_factor: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub seed_amplitude: Option<f64>,
    /// Solve on the whole line instead of the even half.
    #[arg(long)]
    pub full_line: bool,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Allow F < 1 (experimental; needs surface tension to seed).
    #[arg(long)]
    pub subcritical: bool,
}

#[derive(Debug, Args)]
pub struct ContinueArgs {
    /// Family file `{g, c, d, ustar}`.
    pub family: PathBuf,
    /// Starting Froude number.
    #[arg(long, default_value_t = 1.02)]
    pub from: f64,
    /// Number of branch points.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub ds: Option<f64>,
    #[arg(long)]
    pub np: Option<usize>,
    #[arg(long)]
    pub nq: Option<usize>,
    #[arg(long)]
    pub length_factor: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Stop when `min (c-u)/(c-U(0))` falls below this.
    #[arg(long)]
    pub stagnation_margin: Option<f64>,
    /// Basename of the branch log and sweep table.
    #[arg(long, default_value = "branch")]
    pub name: String,
}
