mod commands;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use editdec::metrics::DelMode;

use crate::error::Failure;

#[derive(Parser, Debug)]
#[command(
    name = "editdec",
    version,
    about = "Edit-constrained decoding for lexical simplification"
)]
pub struct Cli {
    /// JSON run configuration; flags override its values
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Seed for every stochastic step
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for sentence-level parallelism
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,

    /// Write per-timestep decoding traces as JSON lines
    #[arg(long, global = true, value_name = "PATH")]
    pub trace_out: Option<PathBuf>,

    /// SARI deletion scoring: f1 or precision
    #[arg(long, global = true, value_name = "MODE")]
    pub del_mode: Option<DelMode>,

    /// Score against the first reference file only
    #[arg(long, global = true)]
    pub first_ref_only: bool,

    /// More log output (-v, -vv)
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train an add-k smoothed n-gram model
    TrainLm(TrainLmArgs),
    /// Decode source sentences, with edit constraints when given
    Decode(DecodeArgs),
    /// Derive constraints from aligned sentence pairs or a translation table
    ExtractConstraints(ExtractArgs),
    /// Score system outputs against references
    Evaluate(EvaluateArgs),
    /// Random search over edit weights and delta on validation SARI
    Tune(TuneArgs),
    /// Serve an n-gram model over the scorer line protocol
    ServeScorer(ServeArgs),
}

#[derive(Args, Debug)]
pub struct TrainLmArgs {
    /// Tokenized training text, one sentence per line
    #[arg(long, required = true, num_args = 1..)]
    pub corpus: Vec<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    /// Add-k smoothing constant
    #[arg(long, default_value_t = 0.1)]
    pub k: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Default)]
pub struct ScorerArgs {
    /// Serialized n-gram model
    #[arg(long, value_name = "PATH")]
    pub lm: Option<PathBuf>,
    /// host:port of an external scorer
    #[arg(long, value_name = "ADDR")]
    pub endpoint: Option<String>,
    /// Mixture weight of the copy distribution over source tokens
    #[arg(long, value_name = "MU")]
    pub copy_weight: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct DecoderArgs {
    #[arg(long)]
    pub beam_size: Option<usize>,
    #[arg(long)]
    pub fanout: Option<usize>,
    #[arg(long)]
    pub alpha: Option<usize>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub lambda_insert: Option<f64>,
    #[arg(long)]
    pub lambda_delete: Option<f64>,
    #[arg(long)]
    pub lambda_subst: Option<f64>,
    /// Match constraint tokens case-insensitively
    #[arg(long)]
    pub case_fold: bool,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// One constraint object per source line; plain beam search without it
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// Output file; stdout by default
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[command(flatten)]
    pub decoder: DecoderArgs,
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    #[arg(long)]
    pub source: PathBuf,
    /// Reference side of the aligned pairs
    #[arg(long, requires = "alignments", conflicts_with = "table")]
    pub reference: Option<PathBuf>,
    /// Pharaoh-format alignments, one line per pair
    #[arg(long, requires = "reference")]
    pub alignments: Option<PathBuf>,
    /// Lexical translation table ("src tgt prob" per line)
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Drop table entries below this probability
    #[arg(long, default_value_t = editdec::extract::DEFAULT_MIN_PROB)]
    pub min_prob: f64,
    #[arg(long)]
    pub lambda_insert: Option<f64>,
    #[arg(long)]
    pub lambda_delete: Option<f64>,
    #[arg(long)]
    pub lambda_subst: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// System outputs, one per line
    #[arg(long)]
    pub outputs: PathBuf,
    /// Reference files, each line-aligned with the outputs
    #[arg(long = "reference", num_args = 1..)]
    pub references: Vec<PathBuf>,
    /// Required unless SARI is skipped
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Constraint file for satisfaction rates
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    /// Report BLEU, FKGL and length only
    #[arg(long)]
    pub skip_sari: bool,
    /// Also write the report as JSON
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TuneArgs {
    #[arg(long)]
    pub source: Option<PathBuf>,
    #[arg(long = "reference", num_args = 1..)]
    pub references: Vec<PathBuf>,
    #[arg(long)]
    pub constraints: Option<PathBuf>,
    #[arg(long, default_value_t = editdec::tune::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Pin lambda_insert instead of searching it
    #[arg(long)]
    pub fix_insert: Option<f64>,
    #[arg(long)]
    pub fix_delete: Option<f64>,
    #[arg(long)]
    pub fix_subst: Option<f64>,
    #[arg(long)]
    pub fix_delta: Option<f64>,
    /// Full trial log as JSON
    #[arg(long)]
    pub log_out: Option<PathBuf>,
    /// Run configuration carrying the best weights and delta
    #[arg(long)]
    pub best_out: Option<PathBuf>,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[command(flatten)]
    pub decoder: DecoderArgs,
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long)]
    pub lm: PathBuf,
    /// Address to listen on; port 0 picks a free port
    #[arg(long, conflicts_with = "stdio", required_unless_present = "stdio")]
    pub listen: Option<String>,
    /// Serve a single session on stdin/stdout
    #[arg(long)]
    pub stdio: bool,
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
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report(f),
    }
}

fn report(f: Failure) -> ExitCode {
    eprintln!("error: {f}");
    f.exit_code()
}
