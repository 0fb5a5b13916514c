//! WordNet 3.x database reader (and a minimal writer for fixtures).
//!
//! Only what concept extraction and abstractive-fact synthesis need is kept:
//! the lemma index of every part of speech, synset member lemmas and the
//! hypernym / hyponym / antonym / similar-to pointers.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::retrieval::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
}

impl Pos {
    pub const ALL: [Pos; 4] = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv];

    fn file_suffix(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adj => "adj",
            Pos::Adv => "adv",
        }
    }

    fn symbol(self) -> char {
        match self {
            Pos::Noun => 'n',
            Pos::Verb => 'v',
            Pos::Adj => 'a',
            Pos::Adv => 'r',
        }
    }

    fn from_symbol(s: &str) -> Option<Pos> {
        match s {
            "n" => Some(Pos::Noun),
            "v" => Some(Pos::Verb),
            // adjective satellites live in data.adj
            "a" | "s" => Some(Pos::Adj),
            "r" => Some(Pos::Adv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SynsetId {
    pub pos: Pos,
    pub offset: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    Hypernym,
    Hyponym,
    Antonym,
    Synonym,
}

impl Relation {
    fn from_pointer(symbol: &str) -> Option<Relation> {
        match symbol {
            "@" | "@i" => Some(Relation::Hypernym),
            "~" | "~i" => Some(Relation::Hyponym),
            "!" => Some(Relation::Antonym),
            "&" => Some(Relation::Synonym),
            _ => None,
        }
    }

    fn pointer(self) -> &'static str {
        match self {
            Relation::Hypernym => "@",
            Relation::Hyponym => "~",
            Relation::Antonym => "!",
            Relation::Synonym => "&",
        }
    }
}

/// Pointer from one synset to another. Lexical pointers (antonyms) carry the
/// 1-based word numbers of their endpoints; semantic pointers carry none.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub relation: Relation,
    pub target: SynsetId,
    pub source_word: Option<u16>,
    pub target_word: Option<u16>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synset {
    pub id: SynsetId,
    /// Normalized member lemmas, in file order.
    pub lemmas: Vec<String>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconStats {
    pub skipped_lines: usize,
    pub dangling_edges: usize,
    pub dangling_senses: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    lemma_index: HashMap<String, Vec<SynsetId>>,
    synsets: HashMap<SynsetId, Synset>,
    max_lemma_len: usize,
    stats: LexiconStats,
}

/// Lowercases, maps underscores to spaces and re-joins the shared tokenizer's
/// output with single spaces. Idempotent.
pub fn normalize_lemma(lemma: &str) -> String {
    tokenize(&lemma.replace('_', " ")).join(" ")
}

impl Lexicon {
    /// Reads `index.{noun,verb,adj,adv}` and `data.{noun,verb,adj,adv}` from
    /// a WordNet database directory.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::Ingest(format!("wordnet directory not found: {}", dir.display())));
        }
        let mut builder = LexiconBuilder::default();
        let mut skipped = 0;
        for pos in Pos::ALL {
            let data_path = dir.join(format!("data.{}", pos.file_suffix()));
            let data = read(&data_path)?;
            for line in data.lines().filter(|l| !l.starts_with(' ') && !l.is_empty()) {
                match parse_data_line(line) {
                    Some(synset) => builder.synsets.push(synset),
                    None => skipped += 1,
                }
            }
            let index_path = dir.join(format!("index.{}", pos.file_suffix()));
            let index = read(&index_path)?;
            for line in index.lines().filter(|l| !l.starts_with(' ') && !l.is_empty()) {
                match parse_index_line(line) {
                    Some((lemma, ids)) => {
                        for id in ids {
                            builder.add_sense(&lemma, id);
                        }
                    }
                    None => skipped += 1,
                }
            }
        }
        let mut lexicon = builder.build();
        lexicon.stats.skipped_lines = skipped;
        if skipped > 0 {
            warn!("wordnet: skipped {skipped} unparseable lines in {}", dir.display());
        }
        Ok(lexicon)
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.lemma_index.contains_key(lemma)
    }

    pub fn synsets_of(&self, lemma: &str) -> &[SynsetId] {
        self.lemma_index.get(lemma).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn synset(&self, id: SynsetId) -> Option<&Synset> {
        self.synsets.get(&id)
    }

    pub fn lemma_count(&self) -> usize {
        self.lemma_index.len()
    }

    pub fn synset_count(&self) -> usize {
        self.synsets.len()
    }

    /// Longest lemma, in tokens.
    pub fn max_lemma_len(&self) -> usize {
        self.max_lemma_len
    }

    pub fn stats(&self) -> &LexiconStats {
        &self.stats
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> + '_ {
        self.lemma_index.keys().map(String::as_str)
    }

    /// Writes the lexicon as a WordNet database (`index.*` and `data.*` for
    /// every part of speech). Offsets are reassigned so that each one is the
    /// byte position of its line, as in the real database.
    pub fn write_wordnet(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let mut by_pos: BTreeMap<Pos, Vec<&Synset>> = BTreeMap::new();
        for s in self.synsets.values() {
            by_pos.entry(s.id.pos).or_default().push(s);
        }
        for list in by_pos.values_mut() {
            list.sort_by_key(|s| s.id.offset);
        }
        // Every offset is printed with 8 digits, so line lengths do not
        // depend on the values and offsets can be assigned in one pass.
        let placeholder: HashMap<SynsetId, u32> = self.synsets.keys().map(|&id| (id, 0)).collect();
        let mut remap: HashMap<SynsetId, u32> = HashMap::new();
        for list in by_pos.values() {
            let mut pos_bytes = 0u32;
            for s in list {
                remap.insert(s.id, pos_bytes);
                pos_bytes += data_line(s, &placeholder).len() as u32;
            }
        }

        for pos in Pos::ALL {
            let mut data = String::new();
            for s in by_pos.get(&pos).map(Vec::as_slice).unwrap_or(&[]) {
                data.push_str(&data_line(s, &remap));
            }
            let path = dir.join(format!("data.{}", pos.file_suffix()));
            fs::write(&path, data).map_err(|e| Error::io(&path, e))?;

            let mut entries: BTreeMap<String, Vec<u32>> = BTreeMap::new();
            for (lemma, ids) in &self.lemma_index {
                for id in ids.iter().filter(|id| id.pos == pos) {
                    entries
                        .entry(lemma.replace(' ', "_"))
                        .or_default()
                        .push(remap[id]);
                }
            }
            let mut index = String::new();
            for (lemma, offsets) in entries {
                let _ = write!(
                    index,
                    "{lemma} {} {} 0 {} 0",
                    pos.symbol(),
                    offsets.len(),
                    offsets.len()
                );
                for o in offsets {
                    let _ = write!(index, " {o:08}");
                }
                index.push('\n');
            }
            let path = dir.join(format!("index.{}", pos.file_suffix()));
            fs::write(&path, index).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

fn data_line(s: &Synset, offsets: &HashMap<SynsetId, u32>) -> String {
    let mut line = format!(
        "{:08} 00 {} {:02x}",
        offsets[&s.id],
        s.id.pos.symbol(),
        s.lemmas.len()
    );
    for lemma in &s.lemmas {
        let _ = write!(line, " {} 0", lemma.replace(' ', "_"));
    }
    let edges: Vec<&Edge> = s.edges.iter().filter(|e| offsets.contains_key(&e.target)).collect();
    let _ = write!(line, " {:03}", edges.len());
    for e in edges {
        let _ = write!(
            line,
            " {} {:08} {} {:02x}{:02x}",
            e.relation.pointer(),
            offsets[&e.target],
            e.target.pos.symbol(),
            e.source_word.unwrap_or(0),
            e.target_word.unwrap_or(0)
        );
    }
    line.push_str(" | \n");
    line
}

fn read(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    // WordNet 3.0 glosses contain a handful of Latin-1 bytes.
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

fn parse_index_line(line: &str) -> Option<(String, Vec<SynsetId>)> {
    let f: Vec<&str> = line.split_whitespace().collect();
    let lemma = normalize_lemma(f.first()?);
    let pos = Pos::from_symbol(f.get(1)?)?;
    let synset_cnt: usize = f.get(2)?.parse().ok()?;
    let p_cnt: usize = f.get(3)?.parse().ok()?;
    let first_offset = 4 + p_cnt + 2;
    let offsets = f.get(first_offset..first_offset + synset_cnt)?;
    let ids = offsets
        .iter()
        .map(|o| o.parse().ok().map(|offset| SynsetId { pos, offset }))
        .collect::<Option<Vec<_>>>()?;
    (!lemma.is_empty()).then_some((lemma, ids))
}

fn parse_data_line(line: &str) -> Option<Synset> {
    let body = line.split(" | ").next()?;
    let f: Vec<&str> = body.split_whitespace().collect();
    let offset: u32 = f.first()?.parse().ok()?;
    let pos = Pos::from_symbol(f.get(2)?)?;
    let w_cnt = usize::from_str_radix(f.get(3)?, 16).ok()?;
    let mut lemmas = Vec::with_capacity(w_cnt);
    for i in 0..w_cnt {
        let word = f.get(4 + 2 * i)?;
        // strip adjective markers such as "(a)" / "(ip)"
        let word = word.split('(').next().unwrap_or(word);
        lemmas.push(normalize_lemma(word));
    }
    let p_at = 4 + 2 * w_cnt;
    let p_cnt: usize = f.get(p_at)?.parse().ok()?;
    let mut edges = Vec::new();
    for i in 0..p_cnt {
        let at = p_at + 1 + 4 * i;
        let symbol = f.get(at)?;
        let target_offset: u32 = f.get(at + 1)?.parse().ok()?;
        let target_pos = Pos::from_symbol(f.get(at + 2)?)?;
        let st = f.get(at + 3)?;
        if st.len() != 4 {
            return None;
        }
        let source = u16::from_str_radix(&st[..2], 16).ok()?;
        let target = u16::from_str_radix(&st[2..], 16).ok()?;
        if let Some(relation) = Relation::from_pointer(symbol) {
            edges.push(Edge {
                relation,
                target: SynsetId {
                    pos: target_pos,
                    offset: target_offset,
                },
                source_word: (source != 0).then_some(source),
                target_word: (target != 0).then_some(target),
            });
        }
    }
    Some(Synset {
        id: SynsetId { pos, offset },
        lemmas,
        edges,
    })
}

/// Programmatic lexicon construction, used by tests and the synthetic
/// corpus generator.
#[derive(Debug, Default)]
pub struct LexiconBuilder {
    synsets: Vec<Synset>,
    senses: Vec<(String, SynsetId)>,
}

impl LexiconBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a synset whose members are `lemmas` and registers each lemma as a
    /// sense of it.
    pub fn synset(&mut self, pos: Pos, lemmas: &[&str]) -> SynsetId {
        let offset = self.synsets.iter().filter(|s| s.id.pos == pos).count() as u32 + 1;
        let id = SynsetId { pos, offset };
        let lemmas: Vec<String> = lemmas.iter().map(|l| normalize_lemma(l)).collect();
        for l in &lemmas {
            self.senses.push((l.clone(), id));
        }
        self.synsets.push(Synset {
            id,
            lemmas,
            edges: Vec::new(),
        });
        id
    }

    /// Adds `child --hypernym--> parent` and the reverse hyponym pointer.
    pub fn hypernym(&mut self, child: SynsetId, parent: SynsetId) {
        self.edge(child, Relation::Hypernym, parent, None, None);
        self.edge(parent, Relation::Hyponym, child, None, None);
    }

    /// Adds symmetric antonym pointers between the first lemmas of `a` and `b`.
    pub fn antonym(&mut self, a: SynsetId, b: SynsetId) {
        self.edge(a, Relation::Antonym, b, Some(1), Some(1));
        self.edge(b, Relation::Antonym, a, Some(1), Some(1));
    }

    pub fn edge(
        &mut self,
        from: SynsetId,
        relation: Relation,
        to: SynsetId,
        source_word: Option<u16>,
        target_word: Option<u16>,
    ) {
        if let Some(s) = self.synsets.iter_mut().find(|s| s.id == from) {
            s.edges.push(Edge {
                relation,
                target: to,
                source_word,
                target_word,
            });
        }
    }

    fn add_sense(&mut self, lemma: &str, id: SynsetId) {
        self.senses.push((lemma.to_owned(), id));
    }

    pub fn build(self) -> Lexicon {
        let mut stats = LexiconStats::default();
        let mut synsets: HashMap<SynsetId, Synset> =
            self.synsets.into_iter().map(|s| (s.id, s)).collect();
        let known: std::collections::HashSet<SynsetId> = synsets.keys().copied().collect();
        for s in synsets.values_mut() {
            let before = s.edges.len();
            s.edges.retain(|e| known.contains(&e.target));
            stats.dangling_edges += before - s.edges.len();
        }
        let mut lemma_index: HashMap<String, Vec<SynsetId>> = HashMap::new();
        let mut max_lemma_len = 0;
        for (lemma, id) in self.senses {
            if !known.contains(&id) {
                stats.dangling_senses += 1;
                continue;
            }
            max_lemma_len = max_lemma_len.max(lemma.split(' ').count());
            let ids = lemma_index.entry(lemma).or_default();
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        Lexicon {
            lemma_index,
            synsets,
            max_lemma_len,
            stats,
        }
    }
}
