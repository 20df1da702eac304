//! `expsum`: contours, chambers, line counts, bounds and component counts
//! from the command line.

mod commands;
mod manifest;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "expsum", version, about = "Discriminant contours and zero-set experiments for real exponential sums")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for relative outputs and the run manifest.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Print nothing on success.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Print the report as JSON instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a signed (or completed) reduced contour to CSV.
    Contour(ContourArgs),
    /// Raster chamber decomposition of a signed contour.
    Chambers(ChambersArgs),
    /// Intersect random lines with the signed contours.
    Gale(GaleArgs),
    /// Evaluate the component bounds.
    Bounds(BoundsArgs),
    /// Count components of a real zero set (n <= 2).
    Components(ComponentsArgs),
    /// Component counts sampled across all signed chambers.
    Census(CensusArgs),
    /// Component counts along a coefficient path.
    Path(PathArgs),
    /// Rerun a bundled worked example and check its known results.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
pub struct ContourArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Sign class such as `+--++`, or `all`.
    #[arg(long, default_value = "all")]
    pub sigma: String,
    #[arg(long, default_value_t = 2000)]
    pub resolution: usize,
    /// Box `xmin,xmax,ymin,ymax` the points are kept in.
    #[arg(long = "box", default_value = "-4,4,-4,4", allow_hyphen_values = true)]
    pub bbox: String,
    /// Add the fibers over non-simplicial faces.
    #[arg(long)]
    pub completed: bool,
    #[arg(long, default_value = "contour.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ChambersArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long)]
    pub sigma: String,
    /// Contour sampling resolution.
    #[arg(long, default_value_t = 2000)]
    pub resolution: usize,
    /// Raster side at the coarsest of the three checked resolutions.
    #[arg(long, default_value_t = 800)]
    pub grid: usize,
    #[arg(long = "box", default_value = "-4,4,-4,4", allow_hyphen_values = true)]
    pub bbox: String,
    /// Use the main contour only.
    #[arg(long)]
    pub main_only: bool,
    #[arg(long, default_value = "chambers.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GaleArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub lines: usize,
    #[arg(long)]
    pub completed: bool,
    /// Grid used to seed the two-unknown solver.
    #[arg(long, default_value_t = 400)]
    pub resolution: usize,
    /// Lines pass through a random point of `[-r, r]^(k-1)`.
    #[arg(long, default_value_t = 4.0)]
    pub box_radius: f64,
    #[arg(long, default_value = "gale.json")]
    pub report: PathBuf,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub k: Option<u64>,
    /// Table over `1..=nmax` x `1..=kmax`.
    #[arg(long, num_args = 2, value_names = ["NMAX", "KMAX"])]
    pub table: Option<Vec<u64>>,
    /// Write the report here as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ComponentsArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long)]
    pub coeffs: PathBuf,
    /// Marching-squares grid at the starting radius.
    #[arg(long, default_value_t = 512)]
    pub resolution: usize,
    #[arg(long, default_value_t = 8.0)]
    pub r0: f64,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    #[arg(long, default_value_t = 800)]
    pub grid: usize,
    #[arg(long, default_value = "census.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PathArgs {
    #[arg(long)]
    pub spectrum: PathBuf,
    #[arg(long)]
    pub from: PathBuf,
    #[arg(long)]
    pub to: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value = "path.json")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    pub case: Case,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Pentagon,
    Parallelogram,
    Circles,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Pentagon => "pentagon",
            Case::Parallelogram => "parallelogram",
            Case::Circles => "circles",
        }
    }
}

/// Why a run did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit 1.
    Input(anyhow::Error),
    /// A checked result did not hold: exit 2.
    Assertion(Vec<String>),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are input errors; help and version requests succeed.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Contour(a) => commands::contour(&cli.global, a),
        Command::Chambers(a) => commands::chambers(&cli.global, a),
        Command::Gale(a) => commands::gale(&cli.global, a),
        Command::Bounds(a) => commands::bounds(&cli.global, a),
        Command::Components(a) => commands::components(&cli.global, a),
        Command::Census(a) => commands::census(&cli.global, a),
        Command::Path(a) => commands::path(&cli.global, a),
        Command::Reproduce(a) => reproduce::run(&cli.global, a.case),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Assertion(failed)) => {
            for f in &failed {
                eprintln!("assertion failed: {f}");
            }
            ExitCode::from(2)
        }
    }
}
