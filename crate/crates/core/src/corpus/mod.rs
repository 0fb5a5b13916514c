//! Worldtree-style corpus ingestion: fact tables, question files and the
//! explanations KB built from annotated training questions.

mod ekb;
mod questions;
mod tables;
mod wordnet_facts;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::concepts::ConceptSet;
use crate::error::{Error, Result};

pub use ekb::{build_explanations_kb, EkbEntry, ExplanationsKb};
pub use questions::{load_question_dir, load_questions, split_of_path, QuestionLoad};
pub use tables::{load_facts, TableStats};
pub use wordnet_facts::{wordnet_abstractive_facts, WORDNET_TABLE};

/// Tables whose rows are abstractive facts (taxonomy, synonymy, antonymy).
pub const ABSTRACTIVE_TABLES: [&str; 3] = ["KINDOF", "SYNONYMY", "OPPOSITES"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Abstractive,
    Unification,
}

impl Role {
    pub fn for_table(table: &str) -> Role {
        if ABSTRACTIVE_TABLES.iter().any(|t| t.eq_ignore_ascii_case(table)) {
            Role::Abstractive
        } else {
            Role::Unification
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fact {
    pub id: String,
    pub text: String,
    pub table: String,
    pub role: Role,
    #[serde(default)]
    pub concepts: ConceptSet,
}

/// The facts knowledge base, in ingestion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Fact>", into = "Vec<Fact>")]
pub struct FactsKb {
    facts: Vec<Fact>,
    by_id: HashMap<String, usize>,
}

impl From<Vec<Fact>> for FactsKb {
    fn from(facts: Vec<Fact>) -> Self {
        let by_id = facts
            .iter()
            .enumerate()
            .map(|(i, f)| (f.id.clone(), i))
            .collect();
        FactsKb { facts, by_id }
    }
}

impl From<FactsKb> for Vec<Fact> {
    fn from(kb: FactsKb) -> Self {
        kb.facts
    }
}

impl FactsKb {
    pub fn new(facts: Vec<Fact>) -> Self {
        facts.into()
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn facts_mut(&mut self) -> &mut [Fact] {
        &mut self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn get(&self, index: usize) -> &Fact {
        &self.facts[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub fn by_id(&self, id: &str) -> Option<&Fact> {
        self.index_of(id).map(|i| &self.facts[i])
    }

    /// Appends `fact` unless its id is already present. Returns whether it was added.
    pub fn push(&mut self, fact: Fact) -> bool {
        if self.by_id.contains_key(&fact.id) {
            return false;
        }
        self.by_id.insert(fact.id.clone(), self.facts.len());
        self.facts.push(fact);
        true
    }

    pub fn retain(&mut self, keep: impl FnMut(&Fact) -> bool) {
        let mut facts = std::mem::take(&mut self.facts);
        facts.retain(keep);
        *self = facts.into();
    }

    pub fn count(&self, role: Role) -> usize {
        self.facts.iter().filter(|f| f.role == role).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Challenge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    /// Question counts of the Worldtree release the reported results use.
    pub fn reference_size(self) -> usize {
        match self {
            Split::Train => 1190,
            Split::Dev => 264,
            Split::Test => 1247,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" | "devel" | "development" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidParameter(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub label: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub stem: String,
    pub choices: Vec<Choice>,
    pub correct_label: String,
    pub difficulty: Difficulty,
    pub split: Split,
    /// Gold explanation fact ids; `None` when the split has no annotation.
    #[serde(default)]
    pub gold_explanation: Option<BTreeSet<String>>,
}

impl QuestionRecord {
    pub fn correct_index(&self) -> Option<usize> {
        self.choices.iter().position(|c| c.label == self.correct_label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub question_id: String,
    pub choice_label: String,
    pub text: String,
    #[serde(default)]
    pub concepts: ConceptSet,
}

/// One hypothesis per choice, in choice order: the choice text followed by
/// the question stem.
pub fn build_hypotheses(q: &QuestionRecord) -> Result<Vec<Hypothesis>> {
    if q.choices.len() < 2 {
        return Err(Error::Precondition(format!(
            "question {} has {} choice(s), need at least 2",
            q.id,
            q.choices.len()
        )));
    }
    Ok(q.choices
        .iter()
        .map(|c| Hypothesis {
            question_id: q.id.clone(),
            choice_label: c.label.clone(),
            text: hypothesis_text(&c.text, &q.stem),
            concepts: ConceptSet::new(),
        })
        .collect())
}

pub(crate) fn hypothesis_text(choice: &str, stem: &str) -> String {
    format!("{} {}", choice.trim(), stem.trim())
}

/// Joins `parts` with single spaces, collapsing any internal whitespace.
pub(crate) fn normalize_space<'a>(parts: impl IntoIterator<Item = &'a str>) -> String {
    let mut out = String::new();
    for part in parts {
        for word in part.split_whitespace() {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(word);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn question(stem: &str, choices: &[&str]) -> QuestionRecord {
        QuestionRecord {
            id: "q1".into(),
            stem: stem.into(),
            choices: choices
                .iter()
                .enumerate()
                .map(|(i, t)| Choice {
                    label: ((b'A' + i as u8) as char).to_string(),
                    text: (*t).into(),
                })
                .collect(),
            correct_label: "A".into(),
            difficulty: Difficulty::Easy,
            split: Split::Train,
            gold_explanation: None,
        }
    }

    #[test]
    fn role_is_function_of_table() {
        assert_eq!(Role::for_table("KINDOF"), Role::Abstractive);
        assert_eq!(Role::for_table("kindof"), Role::Abstractive);
        assert_eq!(Role::for_table("Synonymy"), Role::Abstractive);
        assert_eq!(Role::for_table("OPPOSITES"), Role::Abstractive);
        assert_eq!(Role::for_table("CAUSE"), Role::Unification);
    }

    #[test]
    fn hypotheses_one_per_choice() {
        let q = question(
            "What force is needed to help stop a child from slipping on ice?",
            &["gravity", "friction", "electric", "magnetic"],
        );
        let hs = build_hypotheses(&q).unwrap();
        assert_eq!(hs.len(), 4);
        assert!(hs[1].text.starts_with("friction"));
        assert_eq!(hs[1].choice_label, "B");
    }

    #[test]
    fn concatenation_rule() {
        let q = question("Why does a ball fall?", &["gravity", "magnetism"]);
        assert_eq!(build_hypotheses(&q).unwrap()[0].text, "gravity Why does a ball fall?");
    }

    #[test]
    fn single_choice_rejected() {
        let q = question("Why?", &["gravity"]);
        assert!(matches!(build_hypotheses(&q), Err(Error::Precondition(_))));
    }

    #[test]
    fn whitespace_normalization() {
        assert_eq!(normalize_space(["a  ball", " is a kind of\t", "object "]), "a ball is a kind of object");
    }

    #[test]
    fn kb_push_dedups() {
        let f = Fact {
            id: "x".into(),
            text: "t".into(),
            table: "T".into(),
            role: Role::Unification,
            concepts: ConceptSet::new(),
        };
        let mut kb = FactsKb::default();
        assert!(kb.push(f.clone()));
        assert!(!kb.push(f));
        assert_eq!(kb.len(), 1);
    }
}
