use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swcu_core::concepts::{Lexicon, LexiconBuilder, Pos};
use swcu_core::corpus::{Choice, Difficulty, Fact, FactsKb, QuestionLoad, QuestionRecord, Role, Split};
use swcu_core::{Ablation, Config};

/// Concept lemmas. Two are multi-word and overlap single-word lemmas so the
/// longest-match rule matters.
pub const LEMMAS: &[&str] = &[
    "ice", "water", "friction", "motion", "ball", "object", "gravity", "force", "heat", "metal", "plant", "light",
    "sound", "energy", "heat energy", "light energy",
];

/// Stopwords that are never lemmas and never start a concept.
pub const FILLERS: &[&str] = &["the", "a", "is", "of", "to", "and", "it"];

const LABELS: [&str; 5] = ["A", "B", "C", "D", "E"];

#[derive(Debug, Clone)]
pub struct RawFact {
    pub id: String,
    pub text: String,
    pub abstractive: bool,
}

#[derive(Debug, Clone)]
pub struct RawQuestion {
    pub id: String,
    pub stem: String,
    pub choices: Vec<String>,
    pub correct: usize,
    pub gold: Vec<String>,
}

impl RawQuestion {
    pub fn label(i: usize) -> &'static str {
        LABELS[i]
    }

    pub fn hypothesis(&self, i: usize) -> String {
        format!("{} {}", self.choices[i], self.stem)
    }
}

/// A random knowledge base with at most 25 facts and 5 questions.
#[derive(Debug, Clone)]
pub struct MicroKb {
    pub seed: u64,
    pub facts: Vec<RawFact>,
    pub train: Vec<RawQuestion>,
    pub eval: Vec<RawQuestion>,
    pub config: Config,
}

fn phrase(rng: &mut ChaCha8Rng, words: std::ops::RangeInclusive<usize>) -> String {
    let n = rng.gen_range(words);
    let mut out: Vec<&str> = Vec::new();
    for _ in 0..n {
        if rng.gen_bool(0.4) {
            out.push(FILLERS.choose(rng).unwrap());
        }
        out.push(LEMMAS.choose(rng).unwrap());
    }
    if rng.gen_bool(0.3) {
        out.push(FILLERS.choose(rng).unwrap());
    }
    out.join(" ")
}

impl MicroKb {
    pub fn generate(seed: u64) -> MicroKb {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_facts = rng.gen_range(4..=25);
        let mut used = BTreeSet::new();
        let mut facts = Vec::new();
        let mut last_text = String::new();
        for _ in 0..n_facts {
            let id = loop {
                let id = format!("{:03x}", rng.gen_range(0..4096));
                if used.insert(id.clone()) {
                    break id;
                }
            };
            // Repeated texts exercise the tie-breaking by fact id.
            let text = if !last_text.is_empty() && rng.gen_bool(0.15) {
                last_text.clone()
            } else {
                phrase(&mut rng, 1..=4)
            };
            last_text = text.clone();
            facts.push(RawFact {
                id,
                text,
                abstractive: rng.gen_bool(0.45),
            });
        }

        let ids: Vec<String> = facts.iter().map(|f| f.id.clone()).collect();
        let n_questions = rng.gen_range(2..=5);
        let n_train = rng.gen_range(0..n_questions);
        let question = |n: usize, rng: &mut ChaCha8Rng| {
            let n_choices = rng.gen_range(2..=4);
            let choices = (0..n_choices)
                .map(|_| {
                    if rng.gen_bool(0.1) {
                        FILLERS.choose(rng).unwrap().to_string()
                    } else {
                        phrase(rng, 1..=2)
                    }
                })
                .collect();
            let k = rng.gen_range(1..=3.min(ids.len()));
            RawQuestion {
                id: format!("Q{seed}_{n}"),
                stem: phrase(rng, 1..=4),
                choices,
                correct: rng.gen_range(0..n_choices),
                gold: ids.choose_multiple(rng, k).cloned().collect(),
            }
        };
        let train = (0..n_train).map(|n| question(n, &mut rng)).collect();
        let eval = (n_train..n_questions).map(|n| question(n, &mut rng)).collect();

        let lambdas = [0.0, 0.5, 1.0, 1.7];
        let (_, ablation) = *[
            Ablation::PRESETS[0],
            Ablation::PRESETS[1],
            Ablation::PRESETS[2],
            Ablation::PRESETS[3],
            Ablation::PRESETS[3],
        ]
        .choose(&mut rng)
        .unwrap();
        let config = Config {
            k_neighbours: rng.gen_range(0..=4),
            n_abs: rng.gen_range(0..=8),
            n_unf: rng.gen_range(0..=8),
            k_unifications: rng.gen_range(1..=3),
            lambda1_analogical: *lambdas.choose(&mut rng).unwrap(),
            lambda2_analogical: *lambdas.choose(&mut rng).unwrap(),
            lambda1_explanatory: *lambdas.choose(&mut rng).unwrap(),
            lambda2_explanatory: *lambdas.choose(&mut rng).unwrap(),
            ..Config::default()
        }
        .with_ablation(ablation);

        MicroKb {
            seed,
            facts,
            train,
            eval,
            config,
        }
    }

    pub fn lexicon(&self) -> Lexicon {
        let mut b = LexiconBuilder::new();
        for l in LEMMAS {
            b.synset(Pos::Noun, &[l]);
        }
        b.build()
    }

    pub fn facts_kb(&self) -> FactsKb {
        FactsKb::new(
            self.facts
                .iter()
                .map(|f| {
                    let table = if f.abstractive { "KINDOF" } else { "LAWS" };
                    Fact {
                        id: f.id.clone(),
                        text: f.text.clone(),
                        table: table.into(),
                        role: Role::for_table(table),
                        concepts: Default::default(),
                    }
                })
                .collect(),
        )
    }

    pub fn question_loads(&self) -> BTreeMap<Split, QuestionLoad> {
        let record = |q: &RawQuestion, split| QuestionRecord {
            id: q.id.clone(),
            stem: q.stem.clone(),
            choices: q
                .choices
                .iter()
                .enumerate()
                .map(|(i, t)| Choice {
                    label: LABELS[i].into(),
                    text: t.clone(),
                })
                .collect(),
            correct_label: LABELS[q.correct].into(),
            difficulty: Difficulty::Easy,
            split,
            gold_explanation: Some(q.gold.iter().cloned().collect()),
        };
        let mut out = BTreeMap::new();
        for (split, qs) in [(Split::Train, &self.train), (Split::Test, &self.eval)] {
            out.insert(
                split,
                QuestionLoad {
                    records: qs.iter().map(|q| record(q, split)).collect(),
                    ..Default::default()
                },
            );
        }
        out
    }
}
