//! Command-line pipeline: query extraction, corpus scans, table builds,
//! training, parsing and evaluation.
//!
//! Exit codes are 0 on success, 1 for usage or configuration errors and 2
//! for data errors.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod config;

pub use config::PipelineConfig;

/// A usage or configuration problem, reported with exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "ngramdep", version, about = "Dependency parsing with n-gram count features")]
pub struct Cli {
    /// Pipeline configuration file (TOML); flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for scanning and parsing (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Fail on malformed input lines instead of counting them.
    #[arg(long, global = true)]
    pub strict: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collect arc, triple and sibling queries from CoNLL treebanks.
    ExtractQueries {
        /// Output directory for the query files.
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        treebanks: Vec<PathBuf>,
    },
    /// Scan corpus shards for the extracted queries.
    Scan(ScanArgs),
    /// Merge count tables from separately scanned shards.
    BuildTable {
        #[arg(long)]
        out: PathBuf,
        /// Drop entries below this count after merging.
        #[arg(long)]
        cutoff: Option<u64>,
        #[arg(required = true)]
        tables: Vec<PathBuf>,
    },
    /// Train a parser model.
    Train(TrainArgs),
    /// Parse CoNLL input with a trained model.
    Parse(ParseArgs),
    /// Print UAS, and bootstrap significance against a second system.
    Evaluate(EvalArgs),
    /// Per-POS breakdown of attachment accuracy.
    Analyze(AnalyzeArgs),
    /// Report queries missing from count tables.
    Coverage(CoverageArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CorpusKind {
    Web1t,
    Books,
    Syntactic,
}

impl CorpusKind {
    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::Web1t => "web1t",
            CorpusKind::Books => "books",
            CorpusKind::Syntactic => "syntactic",
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub kind: CorpusKind,
    /// Directory written by extract-queries.
    #[arg(long)]
    pub queries: PathBuf,
    /// Count table path; context lists are written next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Minimum count kept after merging shards (syntactic default 10000).
    #[arg(long)]
    pub cutoff: Option<u64>,
    /// Unary syntactic lookups: "role" or "any".
    #[arg(long)]
    pub unary_mode: Option<String>,
    /// Corpus files, plain or gzip.
    #[arg(required = true)]
    pub shards: Vec<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub surface_table: Option<PathBuf>,
    #[arg(long)]
    pub surface_paraphrase: Option<PathBuf>,
    #[arg(long)]
    pub syntactic_table: Option<PathBuf>,
    #[arg(long)]
    pub syntactic_words: Option<PathBuf>,
    #[arg(long)]
    pub syntactic_tags: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub order: Option<u8>,
    #[arg(long)]
    pub training_k: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// "nopunc" or "punc".
    #[arg(long)]
    pub loss_type: Option<String>,
    /// "f64" or "f32".
    #[arg(long)]
    pub scalar: Option<String>,
    /// Comma-separated feature groups.
    #[arg(long)]
    pub groups: Option<String>,
    /// Allow several children of the root.
    #[arg(long)]
    pub multi_root: bool,
    /// Comma-separated punctuation tags (default: punctuation forms).
    #[arg(long)]
    pub punct_tags: Option<String>,
    #[command(flatten)]
    pub tables: TableArgs,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub tables: TableArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    /// Second system for the paired bootstrap test.
    #[arg(long)]
    pub pred_b: Option<PathBuf>,
    /// Score punctuation tokens too.
    #[arg(long)]
    pub include_punct: bool,
    #[arg(long)]
    pub resamples: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub gold: PathBuf,
    /// Baseline predictions.
    #[arg(long)]
    pub pred: PathBuf,
    /// Combined-system predictions; switches to the gain table.
    #[arg(long)]
    pub pred_b: Option<PathBuf>,
    /// Keep the most frequent tags and fold the rest into "Other".
    #[arg(long)]
    pub top: Option<usize>,
    /// "half-up" or "two-stage".
    #[arg(long)]
    pub rounding: Option<String>,
    #[arg(long)]
    pub include_punct: bool,
    /// Aligned text instead of TSV.
    #[arg(long)]
    pub text: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CoverageKind {
    Surface,
    Syntactic,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long)]
    pub queries: PathBuf,
    #[arg(long, value_enum)]
    pub kind: CoverageKind,
    /// Count tables; with two or more the intersection is reported too.
    #[arg(long = "table", required = true)]
    pub tables: Vec<PathBuf>,
    /// Also print every missing query.
    #[arg(long)]
    pub list: bool,
    #[arg(long)]
    pub rounding: Option<String>,
}

/// Exit code for an error returned by a command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<ngramdep::ParserError>() {
            if matches!(e, ngramdep::ParserError::MissingResource(_) | ngramdep::ParserError::Config(_)) {
                return 1;
            }
        }
    }
    2
}

/// Parse `args` and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
