//! Seeded generator for a small artificial science world, laid out exactly
//! like the real corpus: abstractive tables (kind-of, synonymy, opposites),
//! unification tables (laws and object properties), annotated question
//! files and a lexicon. Used by tests, benches and `swcu` smoke runs when
//! the real corpus is not at hand.
//!
//! Every question instantiates one law with members of the law's
//! categories; the gold explanation is the law plus the kind-of facts that
//! ground the members. Distractor property facts make some questions
//! lexically misleading, and those are tagged as challenge questions.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::concepts::{is_stopword, Lexicon, LexiconBuilder, Pos};
use crate::config::Mode;
use crate::corpus::{Choice, Difficulty, Fact, FactsKb, QuestionLoad, QuestionRecord, Role, Split};
use crate::error::{Error, Result};
use crate::snapshot::Snapshot;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub seed: u64,
    pub categories: usize,
    pub members_per_category: usize,
    pub properties: usize,
    pub verbs: usize,
    pub laws: usize,
    pub distractors: usize,
    pub train: usize,
    pub dev: usize,
    pub test: usize,
    pub choices: usize,
    /// Probability that a question member is replaced by a synonym.
    pub alias_rate: f64,
    /// Probability that a question gets a misleading property fact.
    pub trap_rate: f64,
}

impl SyntheticParams {
    /// A few dozen facts; fast enough for unit tests.
    pub fn tiny(seed: u64) -> Self {
        SyntheticParams {
            seed,
            categories: 5,
            members_per_category: 3,
            properties: 10,
            verbs: 4,
            laws: 10,
            distractors: 12,
            train: 24,
            dev: 10,
            test: 12,
            choices: 4,
            alias_rate: 0.2,
            trap_rate: 0.3,
        }
    }

    /// A corpus of a few hundred facts and a thousand questions.
    pub fn standard(seed: u64) -> Self {
        SyntheticParams {
            seed,
            categories: 30,
            members_per_category: 8,
            properties: 60,
            verbs: 12,
            laws: 120,
            distractors: 300,
            train: 600,
            dev: 150,
            test: 400,
            choices: 4,
            alias_rate: 0.2,
            trap_rate: 0.3,
        }
    }
}

#[derive(Debug, Clone)]
struct Law {
    agent: usize,
    verb: usize,
    property: usize,
    patient: usize,
    fact: usize,
}

#[derive(Debug, Clone)]
struct Row {
    table: &'static str,
    cells: Vec<String>,
    uid: String,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub facts: FactsKb,
    pub questions: BTreeMap<Split, QuestionLoad>,
    pub lexicon: Lexicon,
    rows: Vec<Row>,
}

const CONSONANTS: &[u8] = b"bdfgklmnprtvz";
const VOWELS: &[u8] = b"aeiou";

struct Words<'r> {
    rng: &'r mut ChaCha8Rng,
    used: HashSet<String>,
}

impl Words<'_> {
    /// Pronounceable consonant-vowel words. They never end in a letter the
    /// suffix stripper reacts to.
    fn fresh(&mut self) -> String {
        loop {
            let syllables = self.rng.gen_range(2..=3);
            let mut w = String::new();
            for _ in 0..syllables {
                w.push(*CONSONANTS.choose(self.rng).unwrap() as char);
                w.push(*VOWELS.choose(self.rng).unwrap() as char);
            }
            if !is_stopword(&w) && self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}

fn uid(rng: &mut ChaCha8Rng, used: &mut HashSet<String>) -> String {
    loop {
        let id = format!(
            "{:04x}-{:04x}-{:04x}-{:04x}",
            rng.gen::<u16>(),
            rng.gen::<u16>(),
            rng.gen::<u16>(),
            rng.gen::<u16>()
        );
        if used.insert(id.clone()) {
            return id;
        }
    }
}

impl SyntheticCorpus {
    pub fn generate(p: &SyntheticParams) -> SyntheticCorpus {
        assert!(p.choices >= 2 && p.choices <= 5, "2 to 5 choices");
        assert!(p.properties >= p.choices && p.categories > 0 && p.members_per_category > 0 && p.verbs > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let mut ids = HashSet::new();
        let mut words = Words {
            rng: &mut ChaCha8Rng::seed_from_u64(p.seed ^ 0x5157_4355),
            used: HashSet::new(),
        };

        let categories: Vec<String> = (0..p.categories).map(|_| words.fresh()).collect();
        let members: Vec<Vec<String>> = (0..p.categories)
            .map(|_| (0..p.members_per_category).map(|_| words.fresh()).collect())
            .collect();
        // Every fifth property is a two-word term.
        let properties: Vec<String> = (0..p.properties)
            .map(|i| {
                if i % 5 == 4 {
                    format!("{} {}", words.fresh(), words.fresh())
                } else {
                    words.fresh()
                }
            })
            .collect();
        let verbs: Vec<String> = (0..p.verbs).map(|_| words.fresh()).collect();
        let mut aliases: BTreeMap<(usize, usize), String> = BTreeMap::new();
        for (c, ms) in members.iter().enumerate() {
            for m in 0..ms.len() {
                if m % 3 == 0 {
                    aliases.insert((c, m), words.fresh());
                }
            }
        }

        let mut lex = LexiconBuilder::new();
        let cat_ids: Vec<_> = categories.iter().map(|c| lex.synset(Pos::Noun, &[c])).collect();
        for (c, ms) in members.iter().enumerate() {
            for (m, name) in ms.iter().enumerate() {
                let id = match aliases.get(&(c, m)) {
                    Some(a) => lex.synset(Pos::Noun, &[name, a]),
                    None => lex.synset(Pos::Noun, &[name]),
                };
                lex.hypernym(id, cat_ids[c]);
            }
        }
        let prop_ids: Vec<_> = properties.iter().map(|w| lex.synset(Pos::Adj, &[w])).collect();
        for pair in prop_ids.chunks(2).step_by(2) {
            if let [a, b] = pair {
                lex.antonym(*a, *b);
            }
        }
        for v in &verbs {
            lex.synset(Pos::Verb, &[v]);
        }
        let lexicon = lex.build();

        let mut rows = Vec::new();
        let mut kindof = BTreeMap::new();
        for (c, ms) in members.iter().enumerate() {
            for (m, name) in ms.iter().enumerate() {
                kindof.insert((c, m), rows.len());
                rows.push(Row {
                    table: "KINDOF",
                    cells: vec![name.clone(), "is a kind of".into(), categories[c].clone()],
                    uid: uid(&mut rng, &mut ids),
                });
            }
        }
        let mut synonym_rows = BTreeMap::new();
        for (&(c, m), alias) in &aliases {
            synonym_rows.insert((c, m), rows.len());
            rows.push(Row {
                table: "SYNONYMY",
                cells: vec![alias.clone(), "means".into(), members[c][m].clone()],
                uid: uid(&mut rng, &mut ids),
            });
        }
        for pair in properties.chunks(2).step_by(2) {
            if let [a, b] = pair {
                rows.push(Row {
                    table: "OPPOSITES",
                    cells: vec![a.clone(), "is the opposite of".into(), b.clone()],
                    uid: uid(&mut rng, &mut ids),
                });
            }
        }

        let mut laws = Vec::new();
        let mut seen = HashSet::new();
        while laws.len() < p.laws {
            let agent = rng.gen_range(0..p.categories);
            let patient = rng.gen_range(0..p.categories);
            let verb = rng.gen_range(0..p.verbs);
            let property = rng.gen_range(0..p.properties);
            if !seen.insert((agent, verb, patient)) && seen.len() < p.categories * p.categories * p.verbs {
                continue;
            }
            laws.push(Law {
                agent,
                verb,
                property,
                patient,
                fact: rows.len(),
            });
            rows.push(Row {
                table: "LAWS",
                cells: vec![
                    categories[agent].clone(),
                    verbs[verb].clone(),
                    properties[property].clone(),
                    "for".into(),
                    categories[patient].clone(),
                ],
                uid: uid(&mut rng, &mut ids),
            });
        }
        let mut distractor_rows = Vec::new();
        for _ in 0..p.distractors {
            let c = rng.gen_range(0..p.categories);
            let m = rng.gen_range(0..p.members_per_category);
            let prop = rng.gen_range(0..p.properties);
            distractor_rows.push(((c, m), prop, rows.len()));
            rows.push(Row {
                table: "PROPERTIES",
                cells: vec![members[c][m].clone(), "has".into(), properties[prop].clone()],
                uid: uid(&mut rng, &mut ids),
            });
        }

        let mut questions: BTreeMap<Split, QuestionLoad> = BTreeMap::new();
        let mut serial = 0;
        for (split, n) in [(Split::Train, p.train), (Split::Dev, p.dev), (Split::Test, p.test)] {
            let load = questions.entry(split).or_default();
            for _ in 0..n {
                serial += 1;
                let law = &laws[rng.gen_range(0..laws.len())];
                let m1 = rng.gen_range(0..p.members_per_category);
                let m2 = rng.gen_range(0..p.members_per_category);
                let mut gold = BTreeSet::new();
                gold.insert(rows[law.fact].uid.clone());
                let mut name = |c: usize, m: usize, rng: &mut ChaCha8Rng| {
                    gold.insert(rows[kindof[&(c, m)]].uid.clone());
                    match aliases.get(&(c, m)) {
                        Some(a) if rng.gen_bool(p.alias_rate) => {
                            gold.insert(rows[synonym_rows[&(c, m)]].uid.clone());
                            a.clone()
                        }
                        _ => members[c][m].clone(),
                    }
                };
                let first = name(law.agent, m1, &mut rng);
                let second = name(law.patient, m2, &mut rng);

                let mut options = vec![law.property];
                while options.len() < p.choices {
                    let o = rng.gen_range(0..p.properties);
                    if !options.contains(&o) {
                        options.push(o);
                    }
                }
                options.shuffle(&mut rng);
                let correct = options.iter().position(|&o| o == law.property).unwrap();
                let trapped = distractor_rows
                    .iter()
                    .any(|&(owner, prop, _)| owner == (law.agent, m1) && options.contains(&prop) && prop != law.property)
                    || rng.gen_bool(p.trap_rate);

                let labels = ["A", "B", "C", "D", "E"];
                load.records.push(QuestionRecord {
                    id: format!("SYN_{:05}", serial),
                    stem: format!("what does a {first} {} for a {second}", verbs[law.verb]),
                    choices: options
                        .iter()
                        .enumerate()
                        .map(|(i, &o)| Choice {
                            label: labels[i].into(),
                            text: properties[o].clone(),
                        })
                        .collect(),
                    correct_label: labels[correct].into(),
                    difficulty: if trapped { Difficulty::Challenge } else { Difficulty::Easy },
                    split,
                    gold_explanation: Some(gold),
                });
            }
        }

        let facts = FactsKb::new(
            rows.iter()
                .map(|r| Fact {
                    id: r.uid.clone(),
                    text: r.cells.join(" "),
                    table: r.table.into(),
                    role: Role::for_table(r.table),
                    concepts: Default::default(),
                })
                .collect(),
        );
        SyntheticCorpus {
            facts,
            questions,
            lexicon,
            rows,
        }
    }

    pub fn snapshot(&self, mode: Mode) -> Result<Snapshot> {
        Snapshot::assemble(self.facts.clone(), self.questions.clone(), &self.lexicon, mode)
    }

    /// Writes `tables/`, `questions/` and `wordnet/` under `root`.
    pub fn write(&self, root: impl AsRef<Path>) -> Result<()> {
        let root = root.as_ref();
        let tables = root.join("tables");
        let qdir = root.join("questions");
        for d in [&tables, &qdir] {
            fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        }
        self.lexicon.write_wordnet(root.join("wordnet"))?;

        let headers: BTreeMap<&str, &str> = [
            ("KINDOF", "HYPONYM\t[FILL]\tHYPERNYM"),
            ("SYNONYMY", "X\t[FILL]\tY"),
            ("OPPOSITES", "X\t[FILL]\tY"),
            ("LAWS", "AGENT\tACTION\tPROPERTY\t[FILL]\tPATIENT"),
            ("PROPERTIES", "OBJECT\t[FILL]\tPROPERTY"),
        ]
        .into_iter()
        .collect();
        for (table, header) in headers {
            let mut body = format!("{header}\t[SKIP] COMMENTS\t[SKIP] UID\n");
            for r in self.rows.iter().filter(|r| r.table == table) {
                writeln!(body, "{}\t\t{}", r.cells.join("\t"), r.uid).unwrap();
            }
            let path = tables.join(format!("{table}.tsv"));
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }

        for (split, load) in &self.questions {
            let mut body = String::from("QuestionID\tquestion\tAnswerKey\texplanation\tarcset\n");
            for q in &load.records {
                let mut text = q.stem.clone();
                for c in &q.choices {
                    write!(text, " ({}) {}", c.label, c.text).unwrap();
                }
                let explanation: Vec<String> = q
                    .gold_explanation
                    .iter()
                    .flatten()
                    .map(|id| format!("{id}|CENTRAL"))
                    .collect();
                let set = match q.difficulty {
                    Difficulty::Easy => "Easy",
                    Difficulty::Challenge => "Challenge",
                };
                writeln!(body, "{}\t{}\t{}\t{}\t{}", q.id, text, q.correct_label, explanation.join(" "), set).unwrap();
            }
            let path = qdir.join(format!("questions.{}.tsv", split.name()));
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_facts, load_question_dir};

    #[test]
    fn same_seed_same_corpus() {
        let a = SyntheticCorpus::generate(&SyntheticParams::tiny(5));
        let b = SyntheticCorpus::generate(&SyntheticParams::tiny(5));
        assert_eq!(a.facts, b.facts);
        assert_eq!(a.questions, b.questions);
        let c = SyntheticCorpus::generate(&SyntheticParams::tiny(6));
        assert_ne!(a.facts, c.facts);
    }

    #[test]
    fn disk_layout_reloads_identically() {
        let corpus = SyntheticCorpus::generate(&SyntheticParams::tiny(9));
        let dir = tempfile::tempdir().unwrap();
        corpus.write(dir.path()).unwrap();

        let (facts, stats) = load_facts(dir.path().join("tables")).unwrap();
        assert_eq!(stats.tables, 5);
        let mut expected: Vec<_> = corpus.facts.facts().to_vec();
        let mut got: Vec<_> = facts.facts().to_vec();
        expected.sort_by(|a, b| a.id.cmp(&b.id));
        got.sort_by(|a, b| a.id.cmp(&b.id));
        assert_eq!(expected, got);

        let questions = load_question_dir(dir.path().join("questions")).unwrap();
        assert_eq!(questions, corpus.questions);

        let lexicon = Lexicon::load(dir.path().join("wordnet")).unwrap();
        assert_eq!(lexicon.lemma_count(), corpus.lexicon.lemma_count());
    }

    #[test]
    fn gold_explanations_resolve() {
        let corpus = SyntheticCorpus::generate(&SyntheticParams::tiny(2));
        for load in corpus.questions.values() {
            for q in &load.records {
                for id in q.gold_explanation.iter().flatten() {
                    assert!(corpus.facts.index_of(id).is_some());
                }
                assert!(q.correct_index().is_some());
            }
        }
    }
}
