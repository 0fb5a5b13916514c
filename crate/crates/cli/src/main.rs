//! `swcu`: ingest a corpus, answer questions, explain and evaluate.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "swcu", version, about = "Step-wise conceptual unification QA", arg_required_else_help = true)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Flat TOML config file.
    #[arg(long, global = true, env = "SWCU_CONFIG")]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set n_abs=100`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse tables, questions and the lexicon into a snapshot.
    Ingest(IngestArgs),
    /// Build the retrieval indexes into a snapshot.
    Index(IndexArgs),
    /// Answer every question of a split.
    Answer(AnswerArgs),
    /// Show explanations (or candidate pools) for questions.
    Explain(ExplainArgs),
    /// Score an answers file.
    Evaluate(EvaluateArgs),
    /// Run the four ablation presets on a split.
    Ablate(AblateArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// Directory of fact tables (*.tsv).
    #[arg(long)]
    tables: Option<PathBuf>,
    /// Directory of question files (names contain train/dev/test).
    #[arg(long)]
    questions: Option<PathBuf>,
    /// WordNet database directory.
    #[arg(long, env = "SWCU_WORDNET")]
    wordnet: Option<PathBuf>,
    /// Replace table abstractive facts with lexicon-derived ones.
    #[arg(long)]
    arc_mode: bool,
    /// Also build the retrieval indexes.
    #[arg(long)]
    index: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct IndexArgs {
    #[arg(long)]
    snapshot: Option<PathBuf>,
    /// Defaults to rewriting the input snapshot.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[arg(long, default_value = "test")]
    split: String,
    /// Unifications summed per hypothesis.
    #[arg(short = 'K', long = "k-unifications")]
    k_unifications: Option<usize>,
    /// Ablation preset: ps, abs-ps, abs-ps-rs or full.
    #[arg(long)]
    ablation: Option<String>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0, env = "SWCU_WORKERS")]
    workers: usize,
}

#[derive(Debug, Args)]
struct AnswerArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value = "answers.jsonl")]
    out: PathBuf,
    /// Also write per-question evidence files here.
    #[arg(long)]
    evidence: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExplainArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Only this question (any split).
    #[arg(long)]
    question_id: Option<String>,
    /// Emit the candidate pools as line-delimited JSON.
    #[arg(long)]
    dump_pools: bool,
    /// Write evidence files here instead of printing.
    #[arg(long)]
    evidence: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Answers to score. Without it the answers are computed.
    #[arg(long)]
    answers: Option<PathBuf>,
    #[arg(long, default_value = "report.json")]
    report: PathBuf,
    /// Macro-average explanation precision and recall.
    #[arg(long = "macro")]
    macro_average: bool,
    /// Skip the with/without unification-score bucket tables.
    #[arg(long)]
    no_buckets: bool,
}

#[derive(Debug, Args)]
struct AblateArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value = "ablation.json")]
    report: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.global.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e
                .chain()
                .find_map(|c| c.downcast_ref::<swcu_core::Error>())
                .map_or("error", |e| e.kind());
            let line = serde_json::json!({
                "error": kind,
                "message": format!("{e:#}"),
            });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}

/// A closed stdout (`swcu explain ... | head`) is not a failure.
fn broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let kind = c
            .downcast_ref::<std::io::Error>()
            .map(std::io::Error::kind)
            .or_else(|| c.downcast_ref::<serde_json::Error>().and_then(serde_json::Error::io_error_kind));
        kind == Some(std::io::ErrorKind::BrokenPipe)
    })
}
