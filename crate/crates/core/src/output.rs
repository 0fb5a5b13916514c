//! Serialized forms of engine results: `answers.jsonl` records, per-question
//! evidence files and pool dumps.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::abductive::ExplanationCandidate;
use crate::corpus::FactsKb;
use crate::engine::{HypothesisAnalysis, ScoredAnswer};
use crate::error::{Error, Result};

pub const ANSWERS_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactRef {
    pub id: String,
    pub text: String,
}

impl FactRef {
    fn of(fkb: &FactsKb, index: usize) -> FactRef {
        let f = fkb.get(index);
        FactRef {
            id: f.id.clone(),
            text: f.text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationRecord {
    pub unification: FactRef,
    pub abstractive: Vec<FactRef>,
    pub covered_concepts: Vec<String>,
    pub relevance: f64,
    pub unification_score: f64,
    pub analogical: f64,
    pub plausibility: f64,
    pub explanatory: f64,
}

impl ExplanationRecord {
    pub fn from_candidate(c: &ExplanationCandidate, fkb: &FactsKb) -> Self {
        ExplanationRecord {
            unification: FactRef::of(fkb, c.unification),
            abstractive: c.abstractive.iter().map(|&a| FactRef::of(fkb, a)).collect(),
            covered_concepts: c.covered_concepts.iter().map(str::to_owned).collect(),
            relevance: c.analogical.relevance,
            unification_score: c.analogical.unification,
            analogical: c.analogical.combined,
            plausibility: c.plausibility,
            explanatory: c.explanatory,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceRecord {
    pub label: String,
    pub score: f64,
    pub candidates: usize,
    pub explanations: Vec<ExplanationRecord>,
}

/// One line of `answers.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub version: u32,
    pub question_id: String,
    pub chosen_label: String,
    pub fallback: bool,
    pub config_fingerprint: String,
    pub choices: Vec<ChoiceRecord>,
}

impl AnswerRecord {
    pub fn from_scored(a: &ScoredAnswer, fkb: &FactsKb, fingerprint: &str) -> Self {
        AnswerRecord {
            version: ANSWERS_VERSION,
            question_id: a.question_id.clone(),
            chosen_label: a.chosen_label.clone(),
            fallback: a.fallback,
            config_fingerprint: fingerprint.to_owned(),
            choices: a
                .hypotheses
                .iter()
                .map(|h| ChoiceRecord {
                    label: h.label.clone(),
                    score: h.score,
                    candidates: h.n_candidates,
                    explanations: h
                        .top_explanations
                        .iter()
                        .map(|c| ExplanationRecord::from_candidate(c, fkb))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn chosen(&self) -> Option<&ChoiceRecord> {
        self.choices.iter().find(|c| c.label == self.chosen_label)
    }

    /// Labels ordered by score, best first; ties keep choice order.
    pub fn ranking(&self) -> Vec<&str> {
        let mut order: Vec<&ChoiceRecord> = self.choices.iter().collect();
        order.sort_by(|a, b| b.score.total_cmp(&a.score));
        order.into_iter().map(|c| c.label.as_str()).collect()
    }
}

pub fn write_answers(path: impl AsRef<Path>, records: &[AnswerRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_answers(path: impl AsRef<Path>) -> Result<Vec<AnswerRecord>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: AnswerRecord = serde_json::from_str(&line).map_err(|e| Error::Malformed {
            path: path.to_owned(),
            reason: format!("line {}: {e}", n + 1),
        })?;
        if r.version != ANSWERS_VERSION {
            return Err(Error::Malformed {
                path: path.to_owned(),
                reason: format!("line {}: answers version {} (expected {ANSWERS_VERSION})", n + 1, r.version),
            });
        }
        out.push(r);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvidenceManifest {
    pub config_fingerprint: String,
    /// Question id to evidence file name.
    pub files: BTreeMap<String, String>,
}

/// File name for a question's evidence: the id with anything outside
/// `[A-Za-z0-9_.-]` replaced by `_`.
pub fn evidence_file_name(question_id: &str) -> String {
    let safe: String = question_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.-".contains(c) { c } else { '_' })
        .collect();
    format!("{safe}.tsv")
}

/// Writes one tab-separated evidence file per question plus `MANIFEST.json`.
/// Each line is `label  kind  fact_id  text` for the chosen hypothesis'
/// explanations, unifications before abstractions, in rank order.
pub fn write_evidence(dir: impl AsRef<Path>, records: &[AnswerRecord], fingerprint: &str) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = EvidenceManifest {
        config_fingerprint: fingerprint.to_owned(),
        files: BTreeMap::new(),
    };
    for r in records {
        let name = evidence_file_name(&r.question_id);
        if let Some(prev) = manifest.files.insert(r.question_id.clone(), name.clone()) {
            return Err(Error::InvalidParameter(format!("duplicate question id {} ({prev})", r.question_id)));
        }
        let mut body = String::new();
        if let Some(choice) = r.chosen() {
            let clean = |s: &str| s.replace(['\t', '\n'], " ");
            for e in &choice.explanations {
                body += &format!("{}\tunification\t{}\t{}\n", choice.label, e.unification.id, clean(&e.unification.text));
            }
            let mut seen = std::collections::BTreeSet::new();
            for e in &choice.explanations {
                for a in e.abstractive.iter().filter(|a| seen.insert(a.id.clone())) {
                    body += &format!("{}\tabstraction\t{}\t{}\n", choice.label, a.id, clean(&a.text));
                }
            }
        }
        let path = dir.join(&name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    let path = dir.join("MANIFEST.json");
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
}

/// One line of a `--dump-pools` listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolDumpRecord {
    pub question_id: String,
    pub label: String,
    pub pool: String,
    pub rank: usize,
    pub fact_id: String,
    pub text: String,
    pub retrieval: f64,
    pub relevance: f64,
    pub unification: f64,
    pub combined: f64,
}

pub fn pool_dump(question_id: &str, label: &str, analysis: &HypothesisAnalysis, fkb: &FactsKb) -> Vec<PoolDumpRecord> {
    let pools = [("abstractive", &analysis.pools.abstractive), ("unification", &analysis.pools.unification)];
    pools
        .into_iter()
        .flat_map(|(name, pool)| {
            pool.iter().enumerate().map(move |(rank, e)| {
                let f = fkb.get(e.fact);
                PoolDumpRecord {
                    question_id: question_id.to_owned(),
                    label: label.to_owned(),
                    pool: name.to_owned(),
                    rank: rank + 1,
                    fact_id: f.id.clone(),
                    text: f.text.clone(),
                    retrieval: e.retrieval,
                    relevance: e.score.relevance,
                    unification: e.score.unification,
                    combined: e.score.combined,
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> AnswerRecord {
        let fr = |id: &str, text: &str| FactRef {
            id: id.into(),
            text: text.into(),
        };
        let exp = |u: FactRef, a: Vec<FactRef>, es: f64| ExplanationRecord {
            unification: u,
            abstractive: a,
            covered_concepts: vec!["ice".into()],
            relevance: 0.5,
            unification_score: 0.0,
            analogical: 0.5,
            plausibility: es - 0.5,
            explanatory: es,
        };
        AnswerRecord {
            version: ANSWERS_VERSION,
            question_id: "Mercury/SC 401".into(),
            chosen_label: "B".into(),
            fallback: false,
            config_fingerprint: "00ff".into(),
            choices: vec![
                ChoiceRecord {
                    label: "A".into(),
                    score: 0.4,
                    candidates: 1,
                    explanations: vec![],
                },
                ChoiceRecord {
                    label: "B".into(),
                    score: 1.9,
                    candidates: 2,
                    explanations: vec![
                        exp(fr("u1", "friction acts\tto counter motion"), vec![fr("a1", "ice is a kind of solid")], 1.0),
                        exp(fr("u2", "ice is slippery"), vec![fr("a1", "ice is a kind of solid")], 0.9),
                    ],
                },
            ],
        }
    }

    #[test]
    fn answers_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("answers.jsonl");
        write_answers(&path, &[record(), record()]).unwrap();
        assert_eq!(read_answers(&path).unwrap(), vec![record(), record()]);
    }

    #[test]
    fn evidence_lists_unifications_first() {
        let dir = tempfile::tempdir().unwrap();
        write_evidence(dir.path(), &[record()], "00ff").unwrap();
        let body = fs::read_to_string(dir.path().join("Mercury_SC_401.tsv")).unwrap();
        assert_eq!(
            body,
            "B\tunification\tu1\tfriction acts to counter motion\n\
             B\tunification\tu2\tice is slippery\n\
             B\tabstraction\ta1\tice is a kind of solid\n"
        );
        let manifest: EvidenceManifest =
            serde_json::from_str(&fs::read_to_string(dir.path().join("MANIFEST.json")).unwrap()).unwrap();
        assert_eq!(manifest.config_fingerprint, "00ff");
    }

    #[test]
    fn ranking_keeps_choice_order_on_ties() {
        let mut r = record();
        r.choices[1].score = 0.4;
        assert_eq!(r.ranking(), vec!["A", "B"]);
    }
}
