//! Versioned, line-delimited JSON snapshot of the ingested knowledge bases.
//!
//! Line 1 is a [`SnapshotHeader`]; every following line is one
//! [`SnapshotRecord`]. Reading a snapshot and writing it back reproduces
//! the file byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::concepts::{ConceptExtractor, ConceptSet, Lexicon};
use crate::config::Mode;
use crate::corpus::{
    build_explanations_kb, build_hypotheses, load_facts, load_question_dir, wordnet_abstractive_facts,
    EkbEntry, ExplanationsKb, Fact, FactsKb, Hypothesis, QuestionLoad, QuestionRecord, Role, Split,
    TableStats,
};
use crate::error::{Error, Result};
use crate::retrieval::{Bm25Index, Bm25Params};

pub const SNAPSHOT_FORMAT: &str = "swcu-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

/// A question with its hypotheses and the concept sets used downstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedQuestion {
    pub record: QuestionRecord,
    pub hypotheses: Vec<Hypothesis>,
    pub stem_concepts: ConceptSet,
    pub choice_concepts: Vec<ConceptSet>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub tables: TableStats,
    pub questions: BTreeMap<Split, usize>,
    pub excluded_questions: BTreeMap<Split, usize>,
    pub wordnet_facts: usize,
    pub dangling_explanation_ids: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    pub mode: Mode,
    /// Fingerprint of the config that built the snapshot.
    pub config_fingerprint: Option<String>,
    pub facts: usize,
    pub questions: usize,
    pub ekb_entries: usize,
    pub stats: IngestStats,
    /// BM25 parameters of the embedded indexes, if any.
    pub index_params: Option<Bm25Params>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotRecord {
    Fact(Fact),
    Question(AnnotatedQuestion),
    Ekb(EkbEntry),
    FactIndex(Bm25Index),
    EkbIndex(Bm25Index),
}

#[derive(Debug, Clone)]
pub struct Indexes {
    pub facts: Bm25Index,
    /// Absent when the explanations KB is empty.
    pub ekb: Option<Bm25Index>,
}

impl Indexes {
    pub fn build(facts: &FactsKb, ekb: &ExplanationsKb, params: Bm25Params) -> Result<Indexes> {
        let facts = Bm25Index::build(facts.facts().iter().map(|f| (f.id.as_str(), f.text.as_str())), params)?;
        let ekb = if ekb.is_empty() {
            None
        } else {
            Some(Bm25Index::build(
                ekb.entries
                    .iter()
                    .map(|e| (e.hypothesis.question_id.as_str(), e.hypothesis.text.as_str())),
                params,
            )?)
        };
        Ok(Indexes { facts, ekb })
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub mode: Mode,
    pub config_fingerprint: Option<String>,
    pub facts: FactsKb,
    pub questions: Vec<AnnotatedQuestion>,
    pub ekb: ExplanationsKb,
    pub stats: IngestStats,
    pub indexes: Option<Indexes>,
}

impl Snapshot {
    /// Reads the corpus directories and builds every knowledge base.
    pub fn ingest(tables: &Path, questions: &Path, lexicon: &Lexicon, mode: Mode) -> Result<Snapshot> {
        let (facts, table_stats) = load_facts(tables)?;
        let loads = load_question_dir(questions)?;
        let mut snapshot = Snapshot::assemble(facts, loads, lexicon, mode)?;
        snapshot.stats.tables = table_stats;
        Ok(snapshot)
    }

    /// Builds the knowledge bases from already-parsed facts and questions.
    ///
    /// In ARC mode the table abstractive facts are replaced by facts
    /// synthesized from the lexicon for every concept of every hypothesis.
    pub fn assemble(
        mut facts: FactsKb,
        loads: BTreeMap<Split, QuestionLoad>,
        lexicon: &Lexicon,
        mode: Mode,
    ) -> Result<Snapshot> {
        let extractor = ConceptExtractor::new(lexicon);
        let mut stats = IngestStats::default();

        let mut questions = Vec::new();
        for (split, load) in &loads {
            stats.questions.insert(*split, load.records.len());
            stats.excluded_questions.insert(*split, load.excluded);
            for record in &load.records {
                let mut hypotheses = build_hypotheses(record)?;
                for h in &mut hypotheses {
                    h.concepts = extractor.extract(&h.text);
                }
                questions.push(AnnotatedQuestion {
                    stem_concepts: extractor.extract(&record.stem),
                    choice_concepts: record.choices.iter().map(|c| extractor.extract(&c.text)).collect(),
                    hypotheses,
                    record: record.clone(),
                });
            }
        }

        if mode == Mode::Arc {
            facts.retain(|f| f.role != Role::Abstractive);
            let mut all = ConceptSet::new();
            for q in &questions {
                for h in &q.hypotheses {
                    all.extend_from(&h.concepts);
                }
            }
            for fact in wordnet_abstractive_facts(&all, lexicon) {
                if facts.push(fact) {
                    stats.wordnet_facts += 1;
                }
            }
            info!("arc mode: {} abstractive facts synthesized from the lexicon", stats.wordnet_facts);
        }
        for f in facts.facts_mut() {
            f.concepts = extractor.extract(&f.text);
        }

        let train: Vec<QuestionRecord> = questions
            .iter()
            .filter(|q| q.record.split == Split::Train)
            .map(|q| q.record.clone())
            .collect();
        let mut ekb = build_explanations_kb(&train, &facts);
        for entry in &mut ekb.entries {
            entry.hypothesis.concepts = extractor.extract(&entry.hypothesis.text);
        }
        stats.dangling_explanation_ids = ekb.dangling_dropped;

        Ok(Snapshot {
            mode,
            config_fingerprint: None,
            facts,
            questions,
            ekb,
            stats,
            indexes: None,
        })
    }

    pub fn build_indexes(&mut self, params: Bm25Params) -> Result<()> {
        self.indexes = Some(Indexes::build(&self.facts, &self.ekb, params)?);
        Ok(())
    }

    pub fn questions_in(&self, split: Split) -> Vec<&AnnotatedQuestion> {
        self.questions.iter().filter(|q| q.record.split == split).collect()
    }

    pub fn question(&self, id: &str) -> Option<&AnnotatedQuestion> {
        self.questions.iter().find(|q| q.record.id == id)
    }

    pub fn header(&self) -> SnapshotHeader {
        SnapshotHeader {
            format: SNAPSHOT_FORMAT.into(),
            version: SNAPSHOT_VERSION,
            mode: self.mode,
            config_fingerprint: self.config_fingerprint.clone(),
            facts: self.facts.len(),
            questions: self.questions.len(),
            ekb_entries: self.ekb.len(),
            stats: self.stats.clone(),
            index_params: self.indexes.as_ref().map(|i| i.facts.params()),
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        write_line(&mut w, &self.header())?;
        for f in self.facts.facts() {
            write_line(&mut w, &SnapshotRecordRef::Fact(f))?;
        }
        for q in &self.questions {
            write_line(&mut w, &SnapshotRecordRef::Question(q))?;
        }
        for e in &self.ekb.entries {
            write_line(&mut w, &SnapshotRecordRef::Ekb(e))?;
        }
        if let Some(idx) = &self.indexes {
            write_line(&mut w, &SnapshotRecordRef::FactIndex(&idx.facts))?;
            if let Some(e) = &idx.ekb {
                write_line(&mut w, &SnapshotRecordRef::EkbIndex(e))?;
            }
        }
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_from(r: impl BufRead) -> Result<Snapshot> {
        let mut lines = r.lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::Snapshot("empty snapshot".into()))?
            .map_err(|e| Error::io("<snapshot>", e))?;
        let header: SnapshotHeader = serde_json::from_str(&first)
            .map_err(|e| Error::Snapshot(format!("bad header: {e}")))?;
        if header.format != SNAPSHOT_FORMAT {
            return Err(Error::Snapshot(format!("not a snapshot (format `{}`)", header.format)));
        }
        if header.version != SNAPSHOT_VERSION {
            return Err(Error::SnapshotVersion {
                expected: SNAPSHOT_VERSION,
                found: header.version,
            });
        }

        let mut facts = Vec::new();
        let mut questions = Vec::new();
        let mut entries = Vec::new();
        let (mut fact_index, mut ekb_index) = (None, None);
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io("<snapshot>", e))?;
            let record: SnapshotRecord = serde_json::from_str(&line)
                .map_err(|e| Error::Snapshot(format!("line {}: {e}", n + 2)))?;
            match record {
                SnapshotRecord::Fact(f) => facts.push(f),
                SnapshotRecord::Question(q) => questions.push(q),
                SnapshotRecord::Ekb(e) => entries.push(e),
                SnapshotRecord::FactIndex(i) => fact_index = Some(i),
                SnapshotRecord::EkbIndex(i) => ekb_index = Some(i),
            }
        }
        if facts.len() != header.facts || questions.len() != header.questions || entries.len() != header.ekb_entries {
            return Err(Error::Snapshot("record counts disagree with the header".into()));
        }
        let indexes = fact_index.map(|facts| Indexes { facts, ekb: ekb_index });
        Ok(Snapshot {
            mode: header.mode,
            config_fingerprint: header.config_fingerprint,
            facts: FactsKb::new(facts),
            questions,
            ekb: ExplanationsKb {
                entries,
                dangling_dropped: header.stats.dangling_explanation_ids,
            },
            stats: header.stats,
            indexes,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Snapshot> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Snapshot::read_from(BufReader::new(file))
    }

    /// Warns about split sizes that differ from the reference release.
    pub fn check_split_sizes(&self) -> Vec<(Split, usize)> {
        let mut off = Vec::new();
        for split in Split::ALL {
            let n = self.questions_in(split).len();
            if n != split.reference_size() {
                warn!("{} split: {n} questions (reference release: {})", split.name(), split.reference_size());
                off.push((split, n));
            }
        }
        off
    }

    /// Ids of facts referenced by any explanation, for integrity checks.
    pub fn referenced_fact_ids(&self) -> BTreeSet<&str> {
        self.ekb
            .entries
            .iter()
            .flat_map(|e| e.explanation.iter().map(String::as_str))
            .collect()
    }
}

/// Borrowing twin of [`SnapshotRecord`] so writing does not clone the KBs.
#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum SnapshotRecordRef<'a> {
    Fact(&'a Fact),
    Question(&'a AnnotatedQuestion),
    Ekb(&'a EkbEntry),
    FactIndex(&'a Bm25Index),
    EkbIndex(&'a Bm25Index),
}

fn write_line(w: &mut impl Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io("<snapshot>", e))
}
