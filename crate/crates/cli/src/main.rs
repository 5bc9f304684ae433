//! `scotus-sim`: ingest → build-train → split → simulate → evaluate → correlate.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 no backend reachable.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "scotus-sim", version, about = "Multi-agent appellate court simulation")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Seed for every random choice in the run (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize SCDB case and vote tables plus opinion texts into JSONL.
    Ingest(IngestArgs),
    /// Build the held-out split and the base and per-justice training files.
    BuildTrain(BuildTrainArgs),
    /// Sample the held-out test docket.
    Split(SplitArgs),
    /// Run every docket case through the bench of justice agents.
    Simulate(SimulateArgs),
    /// Score simulation outcomes against the true dispositions.
    Evaluate(EvaluateArgs),
    /// Pairwise vote correlation across a bench.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// SCDB case-centred CSV.
    #[arg(long, value_name = "CSV")]
    pub cases: Option<PathBuf>,
    /// SCDB justice-centred vote CSV.
    #[arg(long, value_name = "CSV")]
    pub votes: Option<PathBuf>,
    /// Directory holding opinion text files.
    #[arg(long, value_name = "DIR", requires = "manifest")]
    pub opinion_dir: Option<PathBuf>,
    /// JSONL manifest mapping opinion files to case, author, decision and year.
    #[arg(long, value_name = "JSONL", requires = "opinion_dir")]
    pub manifest: Option<PathBuf>,
    /// Output directory for corpus.jsonl, votes.jsonl, opinions.jsonl and skip_report.jsonl.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct SplitSelection {
    /// Directory written by `ingest`.
    #[arg(long, value_name = "DIR")]
    pub corpus_dir: Option<PathBuf>,
    /// Natural court to draw cases from, e.g. "Roberts IV" or 1704.
    #[arg(long)]
    pub court_tag: Option<String>,
    /// Comma-separated justice ids or names (default: the Roberts IV bench).
    #[arg(long, value_delimiter = ',')]
    pub bench: Option<Vec<String>>,
    /// Number of held-out test cases.
    #[arg(long, default_value_t = 96)]
    pub test_size: usize,
    /// First opinion year used for per-justice training.
    #[arg(long, default_value_t = 2003)]
    pub year_from: i32,
    /// Last opinion year used for per-justice training.
    #[arg(long, default_value_t = 2016)]
    pub year_to: i32,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildTrainArgs {
    #[command(flatten)]
    pub selection: SplitSelection,
    /// Token budget for each training prompt.
    #[arg(long, default_value_t = 1000)]
    pub max_tokens: usize,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub selection: SplitSelection,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Cases to simulate (JSONL of cases, e.g. docket.jsonl from `split`).
    #[arg(long, value_name = "JSONL")]
    pub docket: PathBuf,
    /// JSON array of backend descriptors.
    #[arg(long, value_name = "JSON", conflicts_with = "stub_profile")]
    pub registry: Option<PathBuf>,
    /// JSON map of justice id to stub spec; replaces network backends.
    #[arg(long, value_name = "JSON")]
    pub stub_profile: Option<PathBuf>,
    /// Comma-separated justice ids; must match the registry or profile.
    #[arg(long, value_delimiter = ',')]
    pub bench: Option<Vec<String>>,
    /// Attempts per justice before giving up on a case.
    #[arg(long)]
    pub max_attempts: Option<u32>,
    /// Sampling temperature sent to every backend.
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Generation length limit sent to every backend.
    #[arg(long)]
    pub max_new_tokens: Option<u32>,
    /// Token budget for each inference prompt.
    #[arg(long, default_value_t = 1000)]
    pub max_tokens: usize,
    /// Output JSONL of simulation outcomes.
    #[arg(long, value_name = "JSONL")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Outcomes JSONL written by `simulate`.
    #[arg(long, value_name = "JSONL")]
    pub outcomes: PathBuf,
    /// Cases with true dispositions (default: <corpus-dir>/corpus.jsonl).
    #[arg(long, value_name = "JSONL")]
    pub truth: Option<PathBuf>,
    /// Corpus directory; its votes enable the alignment correlation.
    #[arg(long, value_name = "DIR")]
    pub corpus_dir: Option<PathBuf>,
    /// Outcomes of a comparison system; enables the effect-size comparison.
    #[arg(long, value_name = "JSONL")]
    pub baseline: Option<PathBuf>,
    /// Report this Cohen's d and its overlap instead of the measured one.
    #[arg(long, allow_negative_numbers = true)]
    pub effect_d: Option<f64>,
    /// Bootstrap resamples for the 80% intervals.
    #[arg(long, default_value_t = 10_000)]
    pub resamples: usize,
    /// Output directory for report.json and table.txt.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    /// Corpus directory written by `ingest`.
    #[arg(long, value_name = "DIR")]
    pub corpus_dir: Option<PathBuf>,
    /// Restrict to cases from this natural court.
    #[arg(long)]
    pub court_tag: Option<String>,
    /// Comma-separated justice ids or names (default: the Roberts IV bench).
    #[arg(long, value_delimiter = ',')]
    pub bench: Option<Vec<String>>,
    /// Output directory for matrix.csv and heat.txt.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(commands::EXIT_INPUT);
            }
        },
        None => RunConfig::default(),
    };
    match commands::run(&cli, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
