use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{match_questions, pct};
use crate::corpus::QuestionRecord;
use crate::error::Result;
use crate::output::AnswerRecord;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    #[default]
    Micro,
    Macro,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationMetrics {
    pub averaging: Averaging,
    /// Attached abstractive facts plus the top-K unifications.
    pub all_facts: Prf,
    /// Top-K unifications only.
    pub unifications_only: Prf,
    /// Questions whose best unification is in the gold explanation.
    pub unification_accuracy: f64,
    pub questions: usize,
    /// Questions without a gold explanation; kept for precision only.
    pub questions_without_gold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub questions: usize,
    /// Percentage whose best unification is in the gold explanation.
    pub accurate_unification: f64,
    pub spurious_unification: f64,
    pub explanation: Prf,
}

/// Explanation quality split by whether the answer was right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessBreakdown {
    pub correct: GroupStats,
    pub wrong: GroupStats,
}

struct Sample<'a> {
    all: BTreeSet<&'a str>,
    unifications: BTreeSet<&'a str>,
    top: Option<&'a str>,
    gold: Option<&'a BTreeSet<String>>,
    correct: bool,
}

fn samples<'a>(answers: &'a [AnswerRecord], questions: &[&'a QuestionRecord]) -> Result<Vec<Sample<'a>>> {
    Ok(match_questions(answers, questions)?
        .into_iter()
        .map(|(a, q)| {
            let mut s = Sample {
                all: BTreeSet::new(),
                unifications: BTreeSet::new(),
                top: None,
                gold: q.gold_explanation.as_ref().filter(|g| !g.is_empty()),
                correct: a.chosen_label == q.correct_label,
            };
            if let Some(choice) = a.chosen() {
                s.top = choice.explanations.first().map(|e| e.unification.id.as_str());
                for e in &choice.explanations {
                    s.unifications.insert(&e.unification.id);
                    s.all.insert(&e.unification.id);
                    s.all.extend(e.abstractive.iter().map(|f| f.id.as_str()));
                }
            }
            s
        })
        .collect())
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn prf<'a>(rows: impl Iterator<Item = (&'a BTreeSet<&'a str>, Option<&'a BTreeSet<String>>)>, avg: Averaging) -> Prf {
    let (mut hit_p, mut pred, mut hit_r, mut gold_n) = (0usize, 0usize, 0usize, 0usize);
    let (mut p_sum, mut r_sum, mut p_n, mut r_n) = (0.0, 0.0, 0usize, 0usize);
    for (predicted, gold) in rows {
        let hits = gold.map_or(0, |g| predicted.iter().filter(|f| g.contains(**f)).count());
        hit_p += hits;
        pred += predicted.len();
        p_sum += pct(hits, predicted.len());
        p_n += 1;
        if let Some(g) = gold {
            hit_r += hits;
            gold_n += g.len();
            r_sum += pct(hits, g.len());
            r_n += 1;
        }
    }
    let (precision, recall) = match avg {
        Averaging::Micro => (pct(hit_p, pred), pct(hit_r, gold_n)),
        Averaging::Macro => (
            if p_n == 0 { 0.0 } else { p_sum / p_n as f64 },
            if r_n == 0 { 0.0 } else { r_sum / r_n as f64 },
        ),
    };
    Prf {
        precision,
        recall,
        f1: f1(precision, recall),
    }
}

fn unification_hits(samples: &[&Sample]) -> (usize, usize) {
    let with_gold: Vec<_> = samples.iter().filter(|s| s.gold.is_some()).collect();
    let hits = with_gold
        .iter()
        .filter(|s| matches!((s.top, s.gold), (Some(t), Some(g)) if g.contains(t)))
        .count();
    (hits, with_gold.len())
}

/// `None` when no question carries a gold explanation.
pub fn explanation_metrics(
    answers: &[AnswerRecord],
    questions: &[&QuestionRecord],
    averaging: Averaging,
) -> Result<Option<ExplanationMetrics>> {
    let samples = samples(answers, questions)?;
    let refs: Vec<&Sample> = samples.iter().collect();
    let (hits, n_gold) = unification_hits(&refs);
    if n_gold == 0 {
        return Ok(None);
    }
    Ok(Some(ExplanationMetrics {
        averaging,
        all_facts: prf(samples.iter().map(|s| (&s.all, s.gold)), averaging),
        unifications_only: prf(samples.iter().map(|s| (&s.unifications, s.gold)), averaging),
        unification_accuracy: pct(hits, n_gold),
        questions: samples.len(),
        questions_without_gold: samples.len() - n_gold,
    }))
}

pub fn correctness_breakdown(
    answers: &[AnswerRecord],
    questions: &[&QuestionRecord],
) -> Result<Option<CorrectnessBreakdown>> {
    let samples = samples(answers, questions)?;
    if samples.iter().all(|s| s.gold.is_none()) {
        return Ok(None);
    }
    let group = |correct: bool| {
        let members: Vec<&Sample> = samples.iter().filter(|s| s.correct == correct && s.gold.is_some()).collect();
        let (hits, n) = unification_hits(&members);
        let with_top = members.iter().filter(|s| s.top.is_some()).count();
        GroupStats {
            questions: n,
            accurate_unification: pct(hits, n),
            spurious_unification: pct(with_top - hits, n),
            explanation: prf(members.iter().map(|s| (&s.all, s.gold)), Averaging::Micro),
        }
    };
    Ok(Some(CorrectnessBreakdown {
        correct: group(true),
        wrong: group(false),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Difficulty;
    use crate::eval::tests::{answer_with, question};

    fn gold(q: &mut QuestionRecord, ids: &[&str]) {
        q.gold_explanation = Some(ids.iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn half_precision_half_recall() {
        let mut q = question("q1", "A", Difficulty::Easy);
        gold(&mut q, &["f1", "f3"]);
        let a = answer_with("q1", &[1.0, 0.0], &[("f1", &[]), ("f2", &[])]);
        let m = explanation_metrics(&[a], &[&q], Averaging::Micro).unwrap().unwrap();
        assert_eq!(m.all_facts.precision, 50.0);
        assert_eq!(m.all_facts.recall, 50.0);
        assert_eq!(m.all_facts.f1, 50.0);
        assert_eq!(m.unification_accuracy, 100.0);
    }

    #[test]
    fn perfect_prediction() {
        let mut q = question("q1", "B", Difficulty::Easy);
        gold(&mut q, &["u", "a"]);
        let a = answer_with("q1", &[0.0, 1.0], &[("u", &["a"])]);
        let m = explanation_metrics(&[a], &[&q], Averaging::Macro).unwrap().unwrap();
        assert_eq!((m.all_facts.precision, m.all_facts.recall, m.all_facts.f1), (100.0, 100.0, 100.0));
        assert_eq!(m.unifications_only.recall, 50.0);
    }

    #[test]
    fn no_gold_anywhere_gives_none() {
        let q = question("q1", "A", Difficulty::Easy);
        let a = answer_with("q1", &[1.0, 0.0], &[("f1", &[])]);
        assert!(explanation_metrics(&[a], &[&q], Averaging::Micro).unwrap().is_none());
    }

    #[test]
    fn missing_gold_counts_for_precision_only() {
        let mut q1 = question("q1", "A", Difficulty::Easy);
        gold(&mut q1, &["f1"]);
        let q2 = question("q2", "A", Difficulty::Easy);
        let a1 = answer_with("q1", &[1.0, 0.0], &[("f1", &[])]);
        let a2 = answer_with("q2", &[1.0, 0.0], &[("f9", &[])]);
        let m = explanation_metrics(&[a1, a2], &[&q1, &q2], Averaging::Micro).unwrap().unwrap();
        assert_eq!(m.all_facts.precision, 50.0);
        assert_eq!(m.all_facts.recall, 100.0);
        assert_eq!(m.questions_without_gold, 1);
        assert_eq!(m.unification_accuracy, 100.0);
    }

    #[test]
    fn breakdown_separates_right_and_wrong() {
        let mut q1 = question("q1", "A", Difficulty::Easy);
        gold(&mut q1, &["f1"]);
        let mut q2 = question("q2", "A", Difficulty::Easy);
        gold(&mut q2, &["f1"]);
        let right = answer_with("q1", &[1.0, 0.0], &[("f1", &[])]);
        let wrong = answer_with("q2", &[0.0, 1.0], &[("f2", &[])]);
        let b = correctness_breakdown(&[right, wrong], &[&q1, &q2]).unwrap().unwrap();
        assert_eq!(b.correct.accurate_unification, 100.0);
        assert_eq!(b.wrong.accurate_unification, 0.0);
        assert_eq!(b.wrong.spurious_unification, 100.0);
    }
}
