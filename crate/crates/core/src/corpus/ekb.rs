use std::collections::BTreeSet;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{build_hypotheses, FactsKb, Hypothesis, QuestionRecord, Split};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EkbEntry {
    pub hypothesis: Hypothesis,
    pub explanation: BTreeSet<String>,
}

/// Explained hypotheses: the correct-choice hypothesis of every training
/// question paired with its gold explanation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationsKb {
    pub entries: Vec<EkbEntry>,
    /// Gold fact ids that did not resolve in the facts KB.
    pub dangling_dropped: usize,
}

impl ExplanationsKb {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn build_explanations_kb(train: &[QuestionRecord], fkb: &FactsKb) -> ExplanationsKb {
    let mut ekb = ExplanationsKb::default();
    for q in train.iter().filter(|q| q.split == Split::Train) {
        let Some(correct) = q.correct_index() else {
            continue;
        };
        let Ok(mut hypotheses) = build_hypotheses(q) else {
            continue;
        };
        let hypothesis = hypotheses.swap_remove(correct);
        let mut explanation = BTreeSet::new();
        for id in q.gold_explanation.iter().flatten() {
            if fkb.index_of(id).is_some() {
                explanation.insert(id.clone());
            } else {
                ekb.dangling_dropped += 1;
            }
        }
        ekb.entries.push(EkbEntry {
            hypothesis,
            explanation,
        });
    }
    if ekb.dangling_dropped > 0 {
        warn!("explanations KB: dropped {} dangling fact ids", ekb.dangling_dropped);
    }
    ekb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::ConceptSet;
    use crate::corpus::{Choice, Difficulty, Fact, Role};

    fn fkb() -> FactsKb {
        FactsKb::new(
            ["f1", "f2"]
                .iter()
                .map(|id| Fact {
                    id: (*id).into(),
                    text: format!("fact {id}"),
                    table: "T".into(),
                    role: Role::Unification,
                    concepts: ConceptSet::new(),
                })
                .collect(),
        )
    }

    fn q(id: &str, gold: &[&str]) -> QuestionRecord {
        QuestionRecord {
            id: id.into(),
            stem: "why".into(),
            choices: vec![
                Choice { label: "A".into(), text: "x".into() },
                Choice { label: "B".into(), text: "y".into() },
            ],
            correct_label: "B".into(),
            difficulty: Difficulty::Easy,
            split: Split::Train,
            gold_explanation: Some(gold.iter().map(|s| (*s).to_owned()).collect()),
        }
    }

    #[test]
    fn reuse_counts() {
        let ekb = build_explanations_kb(&[q("1", &["f1"]), q("2", &["f1", "f2"]), q("3", &["f2"])], &fkb());
        assert_eq!(ekb.len(), 3);
        let uses = ekb.entries.iter().filter(|e| e.explanation.contains("f1")).count();
        assert_eq!(uses, 2);
        assert_eq!(ekb.entries[0].hypothesis.text, "y why");
    }

    #[test]
    fn dangling_ids_dropped_and_empty_gold_kept() {
        let ekb = build_explanations_kb(&[q("1", &["f1", "zzz"]), q("2", &[])], &fkb());
        assert_eq!(ekb.dangling_dropped, 1);
        assert_eq!(ekb.entries[1].explanation.len(), 0);
        let fkb = fkb();
        assert!(ekb.entries.iter().flat_map(|e| &e.explanation).all(|id| fkb.index_of(id).is_some()));
    }

    #[test]
    fn non_train_questions_ignored() {
        let mut dev = q("d", &["f1"]);
        dev.split = Split::Dev;
        assert!(build_explanations_kb(&[dev], &fkb()).is_empty());
        assert!(build_explanations_kb(&[], &fkb()).is_empty());
    }
}
