use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mint_core::eval::RectMapping;
use mint_core::miner::{MinerConfig, PruneMode};
use mint_core::synth::Layout;
use mint_core::BinsSpec;

mod commands;
mod document;

/// Mines hyper-rectangle patterns from numerical data by minimising
/// description length.
#[derive(Debug, Parser)]
#[command(name = "mint", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mine a pattern set from a CSV file and write it as JSON.
    Mine(MineArgs),
    /// Generate a synthetic dataset together with its ground truth.
    Synth(SynthArgs),
    /// Score a mined pattern file.
    Eval(EvalArgs),
    /// Write the interval indices of every object as CSV.
    Discretize(DiscretizeArgs),
    /// Mine over the standard grid of interval and neighbour counts.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    input: PathBuf,
    /// Column holding class labels; excluded from the attributes.
    #[arg(long)]
    label_column: Option<String>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Intervals per attribute: `sqrt`, a count, or one count per attribute
    /// separated by commas.
    #[arg(long, default_value = "sqrt", conflicts_with = "grid_file")]
    bins: BinsSpec,
    /// Cut points, one comma-separated line per attribute.
    #[arg(long)]
    grid_file: Option<PathBuf>,
    /// Round the equal-width range outward to integers.
    #[arg(long, conflicts_with = "grid_file")]
    grid_pad: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbours {
    Sqrt,
    Fixed(usize),
}

impl std::str::FromStr for Neighbours {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("sqrt") {
            return Ok(Neighbours::Sqrt);
        }
        match s.parse::<usize>() {
            Ok(0) => Err("must be at least 1".into()),
            Ok(k) => Ok(Neighbours::Fixed(k)),
            Err(_) => Err(format!("expected an integer or `sqrt`, got '{s}'")),
        }
    }
}

impl Neighbours {
    fn resolve(self, n_objects: usize) -> usize {
        match self {
            Neighbours::Sqrt => mint_core::dataset::sqrt_count(n_objects),
            Neighbours::Fixed(k) => k,
        }
    }
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Cap on pruning candidates examined per pass.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    prune_top_n: Option<u64>,
    /// Smoothing added to every usage count.
    #[arg(long, default_value_t = mint_core::mdl::DEFAULT_EPSILON, value_parser = positive_real)]
    epsilon: f64,
    /// Skip the pruning pass.
    #[arg(long, conflicts_with = "prune_at_end")]
    no_prune: bool,
    /// Prune only once merging has stalled instead of after every pass.
    #[arg(long)]
    prune_at_end: bool,
    /// Pair new patterns only with the neighbours of their parts.
    #[arg(long)]
    knn_propagate: bool,
}

fn positive_real(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got '{s}'")),
    }
}

impl SearchArgs {
    fn config(&self, k_neighbors: usize) -> MinerConfig {
        let prune = if self.no_prune {
            PruneMode::Off
        } else if self.prune_at_end {
            PruneMode::AtEnd
        } else {
            PruneMode::EachPass
        };
        MinerConfig {
            k_neighbors,
            prune_top_n: self.prune_top_n.map(|n| n as usize),
            epsilon: self.epsilon,
            prune,
            knn_propagate: self.knn_propagate,
        }
    }
}

#[derive(Debug, Args)]
struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Nearest neighbours per cell for the initial candidates.
    #[arg(long, default_value = "sqrt")]
    k: Neighbours,
    #[command(flatten)]
    search: SearchArgs,
    /// Include the object ids covered by each pattern.
    #[arg(long)]
    emit_covers: bool,
    /// Output file; standard output if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    layout: Layout,
    /// Points sampled per ground-truth rectangle.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    support: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving `data.csv` and `truth.txt`; created if missing.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Pattern file written by `mine`.
    #[arg(long)]
    patterns: PathBuf,
    /// Ground-truth rectangles written by `synth`.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// The mined CSV, needed for overlap and accuracy scores.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    label_column: Option<String>,
    /// Weight accuracy by pattern usage.
    #[arg(long)]
    weighted: bool,
    /// Compare grid-interval boxes instead of the boxes around covered values.
    #[arg(long)]
    grid_boxes: bool,
    /// Write CSV instead of JSON.
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiscretizeArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the cut points in grid-file format.
    #[arg(long)]
    grid_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Restrict the sweep to one interval setting.
    #[arg(long)]
    bins: Option<BinsSpec>,
    /// Restrict the sweep to one neighbour setting.
    #[arg(long)]
    k: Option<Neighbours>,
    #[arg(long)]
    grid_pad: bool,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    weighted: bool,
    /// Result CSV; standard output if omitted. Runtimes go to a sibling
    /// `<stem>.timing.csv`, or to standard error.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl EvalArgs {
    fn mapping(&self) -> RectMapping {
        if self.grid_boxes {
            RectMapping::Grid
        } else {
            RectMapping::Cover
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Mine(a) => commands::mine(a),
        Command::Synth(a) => commands::synth(a),
        Command::Eval(a) => commands::eval(a),
        Command::Discretize(a) => commands::discretize(a),
        Command::Sweep(a) => commands::sweep(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
