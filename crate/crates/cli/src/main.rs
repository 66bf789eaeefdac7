use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Multiresolution analysis of graph signals with random spanning forests.
#[derive(Debug, Parser)]
#[command(name = "intertwine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a benchmark graph and optionally a signal on it.
    Gen(GenArgs),
    /// Decompose a signal and write coefficients and its reconstruction.
    Analyze(PipelineArgs),
    /// Decompose, then keep the largest normalized details.
    Compress(PipelineArgs),
    /// Show the grid search for the sampling parameter q.
    Tune(TuneArgs),
    /// Run the identity and bound checks over the graph zoo.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GraphKind {
    Path,
    Cycle,
    Grid,
    Geometric,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SignalKind {
    /// Piecewise-regular signal with jumps (path graphs only).
    Piecewise,
    /// Sign of the first nontrivial eigenvector.
    FourierSign,
    /// Uniform noise in [-1, 1].
    Random,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GraphKind,
    /// Vertex count (rows for grids).
    #[arg(long)]
    n: usize,
    /// Columns of a grid; defaults to `n`.
    #[arg(long)]
    cols: Option<usize>,
    /// Connection radius of a geometric graph.
    #[arg(long)]
    radius: Option<f64>,
    /// Benchmark signal to write next to the graph.
    #[arg(long, value_enum, requires = "signal")]
    signal_kind: Option<SignalKind>,
    /// Output path of the signal.
    #[arg(long)]
    signal: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path of the graph file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Optional measure file, one value per vertex.
    #[arg(long)]
    mu: Option<PathBuf>,
    #[arg(long)]
    signal: PathBuf,
    /// Maximal number of levels.
    #[arg(long, default_value_t = 64)]
    levels: usize,
    /// Stop once the approximation has at most this many vertices.
    #[arg(long, default_value_t = 16)]
    min_size: usize,
    #[arg(long, default_value_t = 0.125)]
    theta1: f64,
    #[arg(long, default_value_t = 1.0)]
    theta2: f64,
    /// Sparsification error factor.
    #[arg(long, default_value_t = 4.0)]
    theta: f64,
    /// Sparsify the coarse generators.
    #[arg(long)]
    sparsify: bool,
    /// Fraction of detail coefficients kept by `compress`.
    #[arg(long, default_value_t = 0.1)]
    keep: f64,
    /// Number of q values tried per level.
    #[arg(long, default_value_t = 16)]
    grid: usize,
    /// Forests drawn per q value.
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    mu: Option<PathBuf>,
    #[arg(long, default_value_t = 0.125)]
    theta1: f64,
    #[arg(long, default_value_t = 1.0)]
    theta2: f64,
    #[arg(long, default_value_t = 16)]
    grid: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Largest zoo graph size for the exact checks (at most 5).
    #[arg(long, default_value_t = 5)]
    max_n: usize,
    /// Samples per Monte Carlo check; 0 runs only exact checks.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path (JSON lines).
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, record| writeln!(buf, "{}", record.args()))
        .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Compress(a) => commands::compress(&a),
        Command::Tune(a) => commands::tune(&a),
        Command::Validate(a) => commands::validate(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let record = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{record}");
            ExitCode::from(2)
        }
    }
}
