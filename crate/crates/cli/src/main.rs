//! `kgprobe`: build topic graphs, run adaptive evaluations, report results.
//!
//! Exit status:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | usage error: bad flag, missing input file, unknown backend or dimension |
//! | 3 | I/O error, or refusal to overwrite an existing output without `--force` |
//! | 4 | an upstream service (SPARQL endpoint, model API) was unavailable |
//! | 5 | invalid or inconsistent data (bad file contents, empty graph, nothing examined) |

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kgprobe_core::metrics::{Side, Statistic};
use kgprobe_core::question::ExamMode;

#[derive(Parser, Debug)]
#[command(name = "kgprobe", version, about = "Adaptive knowledge-graph probing of language models")]
struct Cli {
    /// TOML configuration file; `KGPROBE_*` variables and flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Crawl a topic graph from seed entities and write it as a PKG file.
    BuildGraph(BuildGraphArgs),
    /// Evaluate an examinee over a PKG file.
    Run(RunArgs),
    /// Synthesize a graph and evaluate the simulated examinee on it.
    Simulate(SimulateArgs),
    /// Grouped metrics, heatmaps or DOT from a PKG file and optional log.
    Report(ReportArgs),
    /// Convert a PKG file to another format.
    Export(ExportArgs),
}

#[derive(Args, Debug)]
struct BuildGraphArgs {
    /// Seed entity ids, one per line.
    #[arg(long)]
    seeds: PathBuf,
    /// Output PKG file; the build report and config snapshot go next to it.
    #[arg(long)]
    out: PathBuf,
    /// Answer queries from a frozen fixture directory instead of the endpoint.
    #[arg(long)]
    fixture_dir: Option<PathBuf>,
    /// Predicate blocklist marking dead edges.
    #[arg(long)]
    blocklist: Option<PathBuf>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    limit: Option<usize>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug, Default)]
struct RunFlags {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iterations: Option<u64>,
    #[arg(long)]
    batch_size: Option<usize>,
    /// EASY (Yes/No only) or HARD (Yes/No and Wh).
    #[arg(long, ignore_case = true)]
    mode: Option<ExamMode>,
    /// Examinee backend name.
    #[arg(long)]
    examinee: Option<String>,
    /// Question-writer backend name.
    #[arg(long)]
    writer: Option<String>,
    /// Judge backend name.
    #[arg(long)]
    judge: Option<String>,
    /// Update only the examined edges.
    #[arg(long)]
    no_propagation: bool,
    #[arg(long)]
    max_in_flight: Option<usize>,
    /// Convergence threshold on the metric spread over the window.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Stamp log records with wall-clock time.
    #[arg(long)]
    wall_clock: bool,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    pkg: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    /// Extra reference triplets (PKG records) for answer sets and labels.
    #[arg(long)]
    supplement: Option<PathBuf>,
    #[command(flatten)]
    flags: RunFlags,
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    out_dir: PathBuf,
    /// Edges in the synthetic graph.
    #[arg(long)]
    edges: Option<usize>,
    /// Error probability shared by all edges.
    #[arg(long)]
    error_prob: Option<f64>,
    /// Per-edge error probabilities drawn uniformly from [0, 1].
    #[arg(long)]
    uniform_errors: bool,
    #[command(flatten)]
    flags: RunFlags,
    #[arg(long)]
    force: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ReportFormat {
    Csv,
    Json,
    Dot,
    Heatmap,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SideArg {
    Subject,
    Object,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Subject => Side::Subject,
            SideArg::Object => Side::Object,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum StatisticArg {
    ZeroSense,
    Win,
}

impl From<StatisticArg> for Statistic {
    fn from(s: StatisticArg) -> Self {
        match s {
            StatisticArg::ZeroSense => Statistic::ZeroSense,
            StatisticArg::Win => Statistic::Win,
        }
    }
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    pkg: PathBuf,
    /// Take tallies from this interaction log instead of the PKG file.
    #[arg(long)]
    log: Option<PathBuf>,
    /// `predicate` or an entity group key such as `year`.
    #[arg(long, default_value = "predicate")]
    group_by: String,
    /// Which endpoint of an edge carries the group.
    #[arg(long, value_enum, default_value = "subject")]
    side: SideArg,
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormat,
    #[arg(long, value_enum, default_value = "zero-sense")]
    statistic: StatisticArg,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ExportFormat {
    Dot,
    EdgesCsv,
}

#[derive(Args, Debug)]
struct ExportArgs {
    #[arg(long)]
    pkg: PathBuf,
    #[arg(long, value_enum, default_value = "dot")]
    format: ExportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildGraph(args) => commands::build_graph(cli.config.as_deref(), args),
        Command::Run(args) => commands::run(cli.config.as_deref(), args),
        Command::Simulate(args) => commands::simulate(cli.config.as_deref(), args),
        Command::Report(args) => commands::report(args),
        Command::Export(args) => commands::export(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(failure::exit_code(&err))
        }
    }
}
