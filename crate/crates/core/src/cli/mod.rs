//! Command-line front end: argument parsing, config files, dispatch and the
//! error/exit-code contract.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use vernacular::simulate::SimMode;
use vernacular::Metric;

#[derive(Parser, Debug)]
#[command(
    name = "vernacular",
    version,
    about = "Genealogies of binary trait data: seriation, neighbor-joining and neighbor-net"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command.
#[derive(Args, Debug, Clone)]
struct Common {
    /// Seed for every randomised step
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory receiving all outputs and the run manifest
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Trait distance: hamming, hamming-normalized or jaccard
    #[arg(long, default_value = "hamming-normalized", value_parser = parse_metric)]
    metric: Metric,
    /// key=value file supplying flag values; explicit flags take precedence [default: none]
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Source of a distance matrix: trait data or a precomputed matrix.
#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct DistanceInput {
    /// Trait CSV (`building_id,<trait…>`); distances use --metric [default: none]
    #[arg(long)]
    input: Option<PathBuf>,
    /// Distance matrix CSV (`taxon,<label…>`) [default: none]
    #[arg(long)]
    distances: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a trait CSV from detection records or normalise an existing trait CSV
    Ingest(IngestArgs),
    /// Per-trait frequencies and the phi correlation matrix as JSON
    Stats(StatsArgs),
    /// Derive the type catalog from building-level trait vectors
    Types(TypesArgs),
    /// Frequency-stratified train/validation/test split of annotated instances
    SplitDataset(SplitDatasetArgs),
    /// Order taxa along a line minimising embedded absences
    Seriate(SeriateArgs),
    /// Neighbor-joining tree as Newick
    Nj(NjArgs),
    /// Neighbor-net circular split system with least-squares weights
    Nnet(NnetArgs),
    /// Splits graph with equal-angle layout from a split system
    Graph(GraphArgs),
    /// Average-linkage style clusters
    Cluster(ClusterArgs),
    /// Simulate a trait corpus with known transmission history
    Simulate(SimulateArgs),
    /// Delta score, tree fit and seriation criterion of a trait matrix
    Diagnose(DiagnoseArgs),
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false, args = ["detections", "traits"])]
struct IngestArgs {
    /// Detection records, one JSON object per line [default: none]
    #[arg(long)]
    detections: Option<PathBuf>,
    /// Existing trait CSV to validate and rewrite canonically [default: none]
    #[arg(long)]
    traits: Option<PathBuf>,
    /// Minimum detection confidence for a trait to count as present
    #[arg(long, default_value_t = vernacular::ingest::DEFAULT_CONFIDENCE)]
    confidence: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct StatsArgs {
    /// Trait CSV (required)
    #[arg(long, required = true)]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct TypesArgs {
    /// Building-level trait CSV (required)
    #[arg(long, required = true)]
    input: PathBuf,
    /// Minimum duplicate count for a vector to become a type
    #[arg(long, default_value_t = vernacular::ingest::DEFAULT_TYPE_THRESHOLD)]
    threshold: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SplitDatasetArgs {
    /// Instance CSV with header `class,instance_id` (required)
    #[arg(long, required = true)]
    input: PathBuf,
    /// Classes with fewer instances use the rare ratio
    #[arg(long, default_value_t = 200)]
    rare_cutoff: usize,
    /// train:validation:test percentages for rare classes
    #[arg(long, default_value = "70:15:15", value_parser = parse_ratio)]
    rare_ratio: vernacular::ingest::SplitRatio,
    /// train:validation:test percentages for common classes
    #[arg(long, default_value = "80:10:10", value_parser = parse_ratio)]
    common_ratio: vernacular::ingest::SplitRatio,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SeriateArgs {
    /// Trait CSV (required)
    #[arg(long, required = true)]
    input: PathBuf,
    /// auto (exhaustive up to 10 taxa), heuristic or brute-force
    #[arg(long, default_value = "auto", value_parser = ["auto", "heuristic", "brute-force"])]
    method: String,
    /// Seeded restarts of the heuristic search
    #[arg(long, default_value_t = vernacular::seriation::DEFAULT_RESTARTS)]
    restarts: usize,
    /// Cut the order into this many contiguous groups; 0 disables grouping
    #[arg(long, default_value_t = 0)]
    groups: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct NjArgs {
    #[command(flatten)]
    source: DistanceInput,
    /// Replace negative branch lengths by zero [default: false]
    #[arg(long, default_value_t = false)]
    clamp_negative: bool,
    /// Decimal places of Newick branch lengths
    #[arg(long, default_value_t = 6)]
    precision: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct NnetArgs {
    #[command(flatten)]
    source: DistanceInput,
    /// Splits lighter than this are dropped
    #[arg(long, default_value_t = vernacular::neighbornet::DEFAULT_WEIGHT_THRESHOLD)]
    weight_threshold: f64,
    /// Optimality tolerance of the least-squares solver
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Split system in interchange format, as written by `nnet` (required)
    #[arg(long, required = true)]
    splits: PathBuf,
    /// `taxon,cluster` CSV used to colour taxa [default: none]
    #[arg(long)]
    clusters: Option<PathBuf>,
    /// Decimal places of Newick branch lengths when the graph is a tree
    #[arg(long, default_value_t = 6)]
    precision: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[command(flatten)]
    source: DistanceInput,
    /// Number of clusters
    #[arg(long, default_value_t = 9)]
    k: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// line, tree or network
    #[arg(long, default_value = "tree", value_parser = parse_mode)]
    mode: SimMode,
    #[arg(long, default_value_t = 25)]
    n_taxa: usize,
    #[arg(long, default_value_t = 14)]
    n_traits: usize,
    /// Per-trait flip probability per generation
    #[arg(long, default_value_t = vernacular::simulate::DEFAULT_FLIP_RATE)]
    flip_rate: f64,
    /// Per-lineage borrowing probability per generation [default: 0.3 in network mode, 0 otherwise]
    #[arg(long)]
    borrow_rate: Option<f64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DiagnoseArgs {
    /// Trait CSV (required)
    #[arg(long, required = true)]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: vernacular::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<SimMode, String> {
    s.parse().map_err(|e: vernacular::Error| e.to_string())
}

fn parse_ratio(s: &str) -> Result<vernacular::ingest::SplitRatio, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Vec<u32> = parts
        .iter()
        .map(|p| p.trim().parse::<u32>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("ratio `{s}` must be three integers a:b:c"))?;
    match nums[..] {
        [a, b, c] => Ok(vernacular::ingest::SplitRatio::new(a, b, c)),
        _ => Err(format!("ratio `{s}` must be three integers a:b:c")),
    }
}

pub(crate) fn command() -> clap::Command {
    Cli::command()
        .args_override_self(true)
        .mut_subcommands(|s| s.args_override_self(true))
}

/// Runs the tool on `args` (program name first) and returns the exit code:
/// 0 on success, 1 on a data or validation error, 2 on a usage error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cmd = command();
    let args = match config::expand(&cmd, args) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let matches = match cmd.try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp
                | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        2
                    } else {
                        0
                    }
                }
                _ => {
                    let rendered = e.to_string();
                    let detail: Vec<&str> = rendered
                        .lines()
                        .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more"))
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .collect();
                    let detail = detail.join(" ");
                    eprintln!("error:usage: {}", detail.trim_start_matches("error: "));
                    2
                }
            };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error:usage: {}", e.to_string().lines().next().unwrap_or_default());
            return 2;
        }
    };
    let (_, sub) = matches.subcommand().expect("subcommand is required");
    match commands::dispatch(cli.command, sub) {
        Ok(()) => 0,
        Err(e) => fail(&e),
    }
}

fn fail(e: &vernacular::Error) -> i32 {
    let msg = e.to_string().replace('\n', " ");
    eprintln!("error:{}: {msg}", e.category());
    1
}
