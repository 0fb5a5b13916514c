//! Accuracy, explanation quality, ablation and error-analysis reports over
//! `answers.jsonl` records.

mod accuracy;
mod buckets;
mod explanation;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use accuracy::{accuracy, AccuracyReport};
pub use buckets::{
    choice_overlap, concept_band, error_buckets, overlap_band, BucketRow, BucketTables, CONCEPT_BANDS, OVERLAP_BANDS,
};
pub use explanation::{
    correctness_breakdown, explanation_metrics, Averaging, CorrectnessBreakdown, ExplanationMetrics, GroupStats, Prf,
};

use crate::config::{Ablation, Config};
use crate::corpus::QuestionRecord;
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::output::AnswerRecord;
use crate::snapshot::{AnnotatedQuestion, Snapshot};

pub const REPORT_VERSION: u32 = 1;

pub(crate) fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Pairs every question with its answer, in question order. Missing,
/// extra or duplicated answers are an error.
pub(crate) fn match_questions<'a, 'q>(
    answers: &'a [AnswerRecord],
    questions: &[&'q QuestionRecord],
) -> Result<Vec<(&'a AnswerRecord, &'q QuestionRecord)>> {
    let mut by_id = BTreeMap::new();
    for a in answers {
        if by_id.insert(a.question_id.as_str(), a).is_some() {
            return Err(Error::Eval(format!("duplicate answer for question {}", a.question_id)));
        }
    }
    let mut out = Vec::with_capacity(questions.len());
    for q in questions {
        let a = by_id
            .remove(q.id.as_str())
            .ok_or_else(|| Error::Eval(format!("no answer for question {}", q.id)))?;
        if !a.choices.iter().any(|c| c.label == q.correct_label) {
            return Err(Error::Eval(format!("answer for {} lacks the gold choice {}", q.id, q.correct_label)));
        }
        out.push((a, *q));
    }
    if let Some(id) = by_id.keys().next() {
        return Err(Error::Eval(format!(
            "{} answers do not match any question (first: {id})",
            by_id.len()
        )));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub version: u32,
    pub split: Option<String>,
    pub preset: Option<String>,
    pub config_fingerprint: String,
    pub k_unifications: usize,
    pub accuracy: AccuracyReport,
    pub explanation: Option<ExplanationMetrics>,
    pub breakdown: Option<CorrectnessBreakdown>,
    pub buckets: Option<BucketTables>,
}

/// Ablation presets evaluated side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub version: u32,
    pub split: Option<String>,
    pub runs: Vec<EvalReport>,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub averaging: Averaging,
    /// Re-run the questions without the unification score for the bucket
    /// tables.
    pub buckets: bool,
    pub workers: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            averaging: Averaging::Micro,
            buckets: true,
            workers: 0,
        }
    }
}

fn split_name(questions: &[&AnnotatedQuestion]) -> Option<String> {
    let first = questions.first()?.record.split;
    questions
        .iter()
        .all(|q| q.record.split == first)
        .then(|| first.name().to_owned())
}

pub fn answer_records(
    snapshot: &Snapshot,
    config: &Config,
    questions: &[&AnnotatedQuestion],
    workers: usize,
) -> Result<Vec<AnswerRecord>> {
    let engine = Engine::new(snapshot, config.clone())?;
    let fingerprint = config.fingerprint();
    Ok(engine
        .answer_all(questions, workers)?
        .iter()
        .map(|a| AnswerRecord::from_scored(a, &snapshot.facts, &fingerprint))
        .collect())
}

/// Evaluates `answers`, produced under `config`, on `questions`.
pub fn evaluate(
    snapshot: &Snapshot,
    config: &Config,
    questions: &[&AnnotatedQuestion],
    answers: &[AnswerRecord],
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let fingerprint = config.fingerprint();
    if let Some(a) = answers.iter().find(|a| a.config_fingerprint != fingerprint) {
        log::warn!(
            "answers for {} were produced with config {} (evaluating under {fingerprint})",
            a.question_id,
            a.config_fingerprint
        );
    }
    let records: Vec<&QuestionRecord> = questions.iter().map(|q| &q.record).collect();
    let buckets = if opts.buckets {
        let mut no_us = config.clone();
        no_us.use_unification = false;
        let without = answer_records(snapshot, &no_us, questions, opts.workers)?;
        Some(error_buckets(answers, &without, questions)?)
    } else {
        None
    };
    Ok(EvalReport {
        version: REPORT_VERSION,
        split: split_name(questions),
        preset: config.ablation().name().map(str::to_owned),
        config_fingerprint: fingerprint,
        k_unifications: config.k_unifications,
        accuracy: accuracy(answers, &records)?,
        explanation: explanation_metrics(answers, &records, opts.averaging)?,
        breakdown: correctness_breakdown(answers, &records)?,
        buckets,
    })
}

/// Answers `questions` under `ablation` and evaluates the result.
pub fn ablation_run(
    snapshot: &Snapshot,
    base: &Config,
    ablation: Ablation,
    questions: &[&AnnotatedQuestion],
    opts: &EvalOptions,
) -> Result<EvalReport> {
    let config = base.clone().with_ablation(ablation);
    let answers = answer_records(snapshot, &config, questions, opts.workers)?;
    evaluate(snapshot, &config, questions, &answers, opts)
}

pub fn ablation_report(
    snapshot: &Snapshot,
    base: &Config,
    questions: &[&AnnotatedQuestion],
    opts: &EvalOptions,
) -> Result<AblationReport> {
    let mut runs = Vec::new();
    for (_, preset) in Ablation::PRESETS {
        runs.push(ablation_run(snapshot, base, preset, questions, opts)?);
    }
    Ok(AblationReport {
        version: REPORT_VERSION,
        split: split_name(questions),
        runs,
    })
}

impl EvalReport {
    /// Plain-text summary for the terminal.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let a = &self.accuracy;
        let _ = writeln!(
            s,
            "split {}  preset {}  config {}  K={}",
            self.split.as_deref().unwrap_or("mixed"),
            self.preset.as_deref().unwrap_or("custom"),
            self.config_fingerprint,
            self.k_unifications
        );
        let _ = writeln!(s, "{:<12}{:>10}{:>10}{:>10}{:>10}", "", "overall", "easy", "challenge", "@2");
        let _ = writeln!(
            s,
            "{:<12}{:>10.2}{:>10.2}{:>10.2}{:>10.2}",
            "accuracy", a.overall, a.easy, a.challenge, a.at2
        );
        let _ = writeln!(
            s,
            "{:<12}{:>10}{:>10}{:>10}   fallbacks {}",
            "questions", a.questions, a.easy_questions, a.challenge_questions, a.fallbacks
        );
        if let Some(e) = &self.explanation {
            let _ = writeln!(s, "\nexplanations ({:?} average, {} without gold)", e.averaging, e.questions_without_gold);
            let _ = writeln!(s, "{:<20}{:>10}{:>10}{:>10}", "", "P", "R", "F1");
            for (name, m) in [("abs + unf", &e.all_facts), ("unf only", &e.unifications_only)] {
                let _ = writeln!(s, "{:<20}{:>10.2}{:>10.2}{:>10.2}", name, m.precision, m.recall, m.f1);
            }
            let _ = writeln!(s, "unification accuracy {:.2}", e.unification_accuracy);
        }
        if let Some(b) = &self.breakdown {
            let _ = writeln!(s, "\n{:<10}{:>10}{:>12}{:>12}", "answer", "questions", "accurate", "spurious");
            for (name, g) in [("correct", &b.correct), ("wrong", &b.wrong)] {
                let _ = writeln!(
                    s,
                    "{:<10}{:>10}{:>12.2}{:>12.2}",
                    name, g.questions, g.accurate_unification, g.spurious_unification
                );
            }
        }
        if let Some(t) = &self.buckets {
            for (title, rows) in [("choice overlap", &t.choice_overlap), ("question concepts", &t.question_concepts)] {
                let _ = writeln!(s, "\n{:<18}{:>10}{:>10}{:>10}", title, "questions", "US", "no US");
                for r in rows {
                    let _ = writeln!(
                        s,
                        "{:<18}{:>10}{:>10.2}{:>10.2}",
                        r.band, r.questions, r.accuracy_with_us, r.accuracy_without_us
                    );
                }
            }
        }
        s
    }
}

impl AblationReport {
    pub fn render(&self) -> String {
        let mut s = format!("{:<12}{:>10}{:>10}{:>10}{:>10}\n", "preset", "overall", "easy", "challenge", "@2");
        for r in &self.runs {
            let a = &r.accuracy;
            let _ = writeln!(
                s,
                "{:<12}{:>10.2}{:>10.2}{:>10.2}{:>10.2}",
                r.preset.as_deref().unwrap_or("custom"),
                a.overall,
                a.easy,
                a.challenge,
                a.at2
            );
        }
        s
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::{Choice, Difficulty, Split};
    use crate::output::{ChoiceRecord, ExplanationRecord, FactRef, ANSWERS_VERSION};

    const LABELS: [&str; 5] = ["A", "B", "C", "D", "E"];

    pub(crate) fn question(id: &str, correct: &str, difficulty: Difficulty) -> QuestionRecord {
        QuestionRecord {
            id: id.into(),
            stem: "stem".into(),
            choices: LABELS[..3]
                .iter()
                .map(|l| Choice {
                    label: l.to_string(),
                    text: format!("choice {l}"),
                })
                .collect(),
            correct_label: correct.into(),
            difficulty,
            split: Split::Dev,
            gold_explanation: None,
        }
    }

    pub(crate) fn answer(id: &str, scores: &[f64]) -> AnswerRecord {
        answer_with(id, scores, &[])
    }

    /// The chosen choice is the first best score and carries
    /// `explanations`, given as (unification id, abstractive ids).
    pub(crate) fn answer_with(id: &str, scores: &[f64], explanations: &[(&str, &[&str])]) -> AnswerRecord {
        let (chosen, _) = crate::abductive::select_answer(scores);
        let fact = |id: &str| FactRef {
            id: id.into(),
            text: String::new(),
        };
        AnswerRecord {
            version: ANSWERS_VERSION,
            question_id: id.into(),
            chosen_label: LABELS[chosen].into(),
            fallback: false,
            config_fingerprint: String::new(),
            choices: scores
                .iter()
                .enumerate()
                .map(|(i, &score)| ChoiceRecord {
                    label: LABELS[i].into(),
                    score,
                    candidates: 0,
                    explanations: if i == chosen {
                        explanations
                            .iter()
                            .map(|(u, abs)| ExplanationRecord {
                                unification: fact(u),
                                abstractive: abs.iter().map(|a| fact(a)).collect(),
                                covered_concepts: vec![],
                                relevance: 0.0,
                                unification_score: 0.0,
                                analogical: 0.0,
                                plausibility: 0.0,
                                explanatory: 0.0,
                            })
                            .collect()
                    } else {
                        vec![]
                    },
                })
                .collect(),
        }
    }

    #[test]
    fn extra_answer_is_fatal() {
        let q = question("q1", "A", Difficulty::Easy);
        let ans = [answer("q1", &[1.0, 0.0, 0.0]), answer("q2", &[1.0, 0.0, 0.0])];
        assert!(match_questions(&ans, &[&q]).is_err());
    }

    #[test]
    fn report_on_synthetic_corpus() {
        use crate::config::Mode;
        use crate::synthetic::{SyntheticCorpus, SyntheticParams};
        let snap = SyntheticCorpus::generate(&SyntheticParams::tiny(4)).snapshot(Mode::Worldtree).unwrap();
        let config = Config::default();
        let qs = snap.questions_in(Split::Dev);
        let answers = answer_records(&snap, &config, &qs, 1).unwrap();
        let report = evaluate(&snap, &config, &qs, &answers, &EvalOptions::default()).unwrap();
        let a = &report.accuracy;
        assert!(a.at2 >= a.overall);
        let weighted = (a.easy * a.easy_questions as f64 + a.challenge * a.challenge_questions as f64)
            / a.questions as f64;
        assert!((weighted - a.overall).abs() < 1e-9);
        let buckets = report.buckets.as_ref().unwrap();
        assert_eq!(buckets.choice_overlap.iter().map(|r| r.questions).sum::<usize>(), qs.len());
        assert_eq!(buckets.question_concepts.iter().map(|r| r.questions).sum::<usize>(), qs.len());
        let e = report.explanation.as_ref().unwrap();
        let (lo, hi) = (e.all_facts.precision.min(e.all_facts.recall), e.all_facts.precision.max(e.all_facts.recall));
        assert!(e.all_facts.f1 >= lo - 1e-9 && e.all_facts.f1 <= hi + 1e-9);

        let again = evaluate(&snap, &config, &qs, &answers, &EvalOptions::default()).unwrap();
        assert_eq!(serde_json::to_string(&report).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn full_preset_matches_default_pipeline() {
        use crate::config::Mode;
        use crate::synthetic::{SyntheticCorpus, SyntheticParams};
        let snap = SyntheticCorpus::generate(&SyntheticParams::tiny(8)).snapshot(Mode::Worldtree).unwrap();
        let qs = snap.questions_in(Split::Test);
        let opts = EvalOptions {
            buckets: false,
            ..Default::default()
        };
        let config = Config::default();
        let direct = evaluate(&snap, &config, &qs, &answer_records(&snap, &config, &qs, 1).unwrap(), &opts).unwrap();
        let preset = ablation_run(&snap, &config, Ablation::FULL, &qs, &opts).unwrap();
        assert_eq!(direct, preset);
    }
}
