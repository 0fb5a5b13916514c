use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use log::info;
use swcu_core::concepts::Lexicon;
use swcu_core::corpus::Split;
use swcu_core::eval::{self, Averaging, EvalOptions};
use swcu_core::output::{pool_dump, read_answers, write_answers, write_evidence, AnswerRecord};
use swcu_core::snapshot::{AnnotatedQuestion, Snapshot};
use swcu_core::{Ablation, Config, Engine, Mode};

use crate::{AblateArgs, AnswerArgs, Cli, Command, EvaluateArgs, ExplainArgs, GlobalArgs, IndexArgs, IngestArgs, RunArgs};

pub fn run(cli: Cli) -> Result<()> {
    let config = resolve_config(&cli.global)?;
    match cli.command {
        Command::Ingest(a) => ingest(config, a),
        Command::Index(a) => index(config, a),
        Command::Answer(a) => answer(config, a),
        Command::Explain(a) => explain(config, a),
        Command::Evaluate(a) => evaluate(config, a),
        Command::Ablate(a) => ablate(config, a),
    }
}

/// Defaults, then the config file, then `SWCU_*` variables, then `--set`.
fn resolve_config(g: &GlobalArgs) -> Result<Config> {
    let mut config = match &g.config {
        Some(path) => Config::load(path).with_context(|| format!("loading config {}", path.display()))?,
        None => Config::default(),
    };
    config = config.with_env(std::env::vars())?;
    let mut overrides = Vec::new();
    for kv in &g.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{kv}`"))?;
        overrides.push((k.to_owned(), v.to_owned()));
    }
    Ok(config.with_overrides(overrides)?)
}

fn required(flag: Option<PathBuf>, from_config: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
    flag.or_else(|| from_config.clone())
        .ok_or_else(|| anyhow!("missing --{name} (or `{name}` in the config file)"))
}

fn ingest(mut config: Config, a: IngestArgs) -> Result<()> {
    if a.arc_mode {
        config.mode = Mode::Arc;
    }
    let tables = required(a.tables, &config.tables, "tables")?;
    let questions = required(a.questions, &config.questions, "questions")?;
    let wordnet = required(a.wordnet, &config.wordnet, "wordnet")?;
    info!("loading lexicon from {}", wordnet.display());
    let lexicon = Lexicon::load(&wordnet)?;
    let mut snapshot = Snapshot::ingest(&tables, &questions, &lexicon, config.mode)?;
    snapshot.check_split_sizes();
    if a.index {
        snapshot.build_indexes(config.bm25())?;
    }
    snapshot.config_fingerprint = Some(config.fingerprint());
    snapshot.write(&a.out)?;
    let h = snapshot.header();
    println!(
        "{}: {} facts, {} questions, {} explained hypotheses",
        a.out.display(),
        h.facts,
        h.questions,
        h.ekb_entries
    );
    Ok(())
}

fn load_snapshot(flag: Option<PathBuf>, config: &Config) -> Result<Snapshot> {
    let path = required(flag, &config.snapshot, "snapshot")?;
    Snapshot::read(&path).with_context(|| format!("reading snapshot {}", path.display()))
}

fn index(config: Config, a: IndexArgs) -> Result<()> {
    let input = required(a.snapshot, &config.snapshot, "snapshot")?;
    let mut snapshot = Snapshot::read(&input)?;
    snapshot.build_indexes(config.bm25())?;
    snapshot.config_fingerprint = Some(config.fingerprint());
    let out = a.out.unwrap_or(input);
    snapshot.write(&out)?;
    println!("{}: indexes built", out.display());
    Ok(())
}

/// Applies the run flags to the config and loads the snapshot.
fn prepare(mut config: Config, r: &RunArgs) -> Result<(Config, Snapshot, Split)> {
    if let Some(k) = r.k_unifications {
        config.k_unifications = k;
    }
    if let Some(name) = &r.ablation {
        config = config.with_ablation(Ablation::preset(name)?);
    }
    config.validate()?;
    let split: Split = r.split.parse()?;
    let snapshot = load_snapshot(r.snapshot.clone(), &config)?;
    if snapshot.mode != config.mode {
        log::warn!("snapshot was ingested in {:?} mode, config says {:?}", snapshot.mode, config.mode);
    }
    Ok((config, snapshot, split))
}

fn answer(config: Config, a: AnswerArgs) -> Result<()> {
    let (config, snapshot, split) = prepare(config, &a.run)?;
    let questions = snapshot.questions_in(split);
    if questions.is_empty() {
        bail!("the snapshot has no {} questions", split.name());
    }
    let records = eval::answer_records(&snapshot, &config, &questions, a.run.workers)?;
    write_answers(&a.out, &records)?;
    if let Some(dir) = &a.evidence {
        write_evidence(dir, &records, &config.fingerprint())?;
    }
    let fallbacks = records.iter().filter(|r| r.fallback).count();
    println!(
        "{}: {} answers ({} fallbacks), config {}",
        a.out.display(),
        records.len(),
        fallbacks,
        config.fingerprint()
    );
    Ok(())
}

fn selected<'s>(snapshot: &'s Snapshot, split: Split, id: Option<&str>) -> Result<Vec<&'s AnnotatedQuestion>> {
    match id {
        Some(id) => Ok(vec![snapshot
            .question(id)
            .ok_or_else(|| anyhow!("no question with id `{id}` in the snapshot"))?]),
        None => Ok(snapshot.questions_in(split)),
    }
}

fn explain(config: Config, a: ExplainArgs) -> Result<()> {
    let (config, snapshot, split) = prepare(config, &a.run)?;
    let questions = selected(&snapshot, split, a.question_id.as_deref())?;
    let engine = Engine::new(&snapshot, config.clone())?;
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());

    if a.dump_pools {
        for q in &questions {
            for h in &q.hypotheses {
                let analysis = engine.analyze(h)?;
                for rec in pool_dump(&q.record.id, &h.choice_label, &analysis, &snapshot.facts) {
                    serde_json::to_writer(&mut out, &rec)?;
                    out.write_all(b"\n")?;
                }
            }
        }
        return Ok(out.flush()?);
    }

    let answers = engine.answer_all(&questions, a.run.workers)?;
    let fingerprint = config.fingerprint();
    let records: Vec<AnswerRecord> = answers
        .iter()
        .map(|s| AnswerRecord::from_scored(s, &snapshot.facts, &fingerprint))
        .collect();
    if let Some(dir) = &a.evidence {
        write_evidence(dir, &records, &fingerprint)?;
        println!("{}: evidence for {} questions", dir.display(), records.len());
        return Ok(());
    }
    for (q, r) in questions.iter().zip(&records) {
        writeln!(out, "{}  {}", q.record.id, q.record.stem)?;
        for c in &r.choices {
            let text = q.record.choices.iter().find(|x| x.label == c.label).map_or("", |x| &x.text);
            let mark = if c.label == r.chosen_label { '*' } else { ' ' };
            let gold = if c.label == q.record.correct_label { " (gold)" } else { "" };
            writeln!(out, " {mark}({}) {text}  score {:.4}{gold}", c.label, c.score)?;
        }
        if let Some(c) = r.chosen() {
            for e in &c.explanations {
                writeln!(
                    out,
                    "    unification {}  es {:.4} = as {:.4} + ps {:.4}  {}",
                    e.unification.id, e.explanatory, e.analogical, e.plausibility, e.unification.text
                )?;
                for f in &e.abstractive {
                    writeln!(out, "      abstraction {}  {}", f.id, f.text)?;
                }
            }
        }
        writeln!(out)?;
    }
    Ok(out.flush()?)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let json = serde_json::to_string_pretty(value)?;
    fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))
}

fn evaluate(config: Config, a: EvaluateArgs) -> Result<()> {
    let (config, snapshot, split) = prepare(config, &a.run)?;
    let (answers, questions) = match &a.answers {
        Some(path) => {
            let answers = read_answers(path)?;
            let mut questions = Vec::with_capacity(answers.len());
            for r in &answers {
                questions.push(
                    snapshot
                        .question(&r.question_id)
                        .ok_or_else(|| anyhow!("answer for unknown question `{}`", r.question_id))?,
                );
            }
            (answers, questions)
        }
        None => {
            let questions = snapshot.questions_in(split);
            (eval::answer_records(&snapshot, &config, &questions, a.run.workers)?, questions)
        }
    };
    let opts = EvalOptions {
        averaging: if a.macro_average { Averaging::Macro } else { Averaging::Micro },
        buckets: !a.no_buckets,
        workers: a.run.workers,
    };
    let report = eval::evaluate(&snapshot, &config, &questions, &answers, &opts)?;
    write_json(&a.report, &report)?;
    print!("{}", report.render());
    Ok(())
}

fn ablate(config: Config, a: AblateArgs) -> Result<()> {
    let (config, snapshot, split) = prepare(config, &a.run)?;
    let questions = snapshot.questions_in(split);
    if questions.is_empty() {
        bail!("the snapshot has no {} questions", split.name());
    }
    let opts = EvalOptions {
        buckets: false,
        workers: a.run.workers,
        ..Default::default()
    };
    let report = eval::ablation_report(&snapshot, &config, &questions, &opts)?;
    write_json(&a.report, &report)?;
    print!("{}", report.render());
    Ok(())
}
