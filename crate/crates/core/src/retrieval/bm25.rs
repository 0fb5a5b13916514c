use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::sparse::SparseVector;
use super::tokenize::tokenize;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1.is_finite() && self.k1 >= 0.0) {
            return Err(Error::InvalidParameter(format!("bm25 k1 = {}", self.k1)));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(Error::InvalidParameter(format!("bm25 b = {}", self.b)));
        }
        Ok(())
    }
}

/// BM25-weighted document vectors plus an inverted index over them.
///
/// Term ids are assigned in order of first occurrence, so the same corpus
/// always yields the same vocabulary and weights.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "Bm25IndexRepr", into = "Bm25IndexRepr")]
pub struct Bm25Index {
    params: Bm25Params,
    doc_ids: Vec<String>,
    vocabulary: Vec<String>,
    doc_freq: Vec<u32>,
    doc_len: Vec<u32>,
    avg_doc_len: f64,
    doc_vectors: Vec<SparseVector>,
    // derived
    term_ids: HashMap<String, u32>,
    postings: Vec<Vec<(u32, f64)>>,
    doc_norms: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Bm25IndexRepr {
    params: Bm25Params,
    doc_ids: Vec<String>,
    vocabulary: Vec<String>,
    doc_freq: Vec<u32>,
    doc_len: Vec<u32>,
    avg_doc_len: f64,
    doc_vectors: Vec<SparseVector>,
}

impl From<Bm25IndexRepr> for Bm25Index {
    fn from(r: Bm25IndexRepr) -> Self {
        Bm25Index::assemble(
            r.params,
            r.doc_ids,
            r.vocabulary,
            r.doc_freq,
            r.doc_len,
            r.avg_doc_len,
            r.doc_vectors,
        )
    }
}

impl From<Bm25Index> for Bm25IndexRepr {
    fn from(i: Bm25Index) -> Self {
        Bm25IndexRepr {
            params: i.params,
            doc_ids: i.doc_ids,
            vocabulary: i.vocabulary,
            doc_freq: i.doc_freq,
            doc_len: i.doc_len,
            avg_doc_len: i.avg_doc_len,
            doc_vectors: i.doc_vectors,
        }
    }
}

impl Bm25Index {
    pub fn build<I, S, T>(docs: I, params: Bm25Params) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        params.validate()?;
        let mut doc_ids = Vec::new();
        let mut vocabulary: Vec<String> = Vec::new();
        let mut term_ids: HashMap<String, u32> = HashMap::new();
        let mut doc_tf: Vec<BTreeMap<u32, u32>> = Vec::new();
        let mut doc_len = Vec::new();

        for (id, text) in docs {
            doc_ids.push(id.into());
            let tokens = tokenize(text.as_ref());
            doc_len.push(tokens.len() as u32);
            let mut tf = BTreeMap::new();
            for tok in tokens {
                let next = vocabulary.len() as u32;
                let tid = *term_ids.entry(tok.clone()).or_insert_with(|| {
                    vocabulary.push(tok);
                    next
                });
                *tf.entry(tid).or_insert(0u32) += 1;
            }
            doc_tf.push(tf);
        }
        if doc_ids.is_empty() {
            return Err(Error::Precondition("cannot index an empty corpus".into()));
        }

        let mut doc_freq = vec![0u32; vocabulary.len()];
        for tf in &doc_tf {
            for &t in tf.keys() {
                doc_freq[t as usize] += 1;
            }
        }
        let avg_doc_len = doc_len.iter().map(|&l| l as f64).sum::<f64>() / doc_len.len() as f64;

        let n = doc_ids.len();
        let doc_vectors = doc_tf
            .iter()
            .zip(&doc_len)
            .map(|(tf, &len)| {
                SparseVector::from_pairs(tf.iter().map(|(&t, &f)| {
                    let w = term_weight(params, n, doc_freq[t as usize], f, len, avg_doc_len);
                    (t, w)
                }))
            })
            .collect();

        Ok(Bm25Index::assemble(
            params,
            doc_ids,
            vocabulary,
            doc_freq,
            doc_len,
            avg_doc_len,
            doc_vectors,
        ))
    }

    fn assemble(
        params: Bm25Params,
        doc_ids: Vec<String>,
        vocabulary: Vec<String>,
        doc_freq: Vec<u32>,
        doc_len: Vec<u32>,
        avg_doc_len: f64,
        doc_vectors: Vec<SparseVector>,
    ) -> Self {
        let term_ids = vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        let mut postings = vec![Vec::new(); vocabulary.len()];
        for (d, v) in doc_vectors.iter().enumerate() {
            for &(t, w) in v.entries() {
                postings[t as usize].push((d as u32, w));
            }
        }
        let doc_norms = doc_vectors.iter().map(SparseVector::norm).collect();
        Bm25Index {
            params,
            doc_ids,
            vocabulary,
            doc_freq,
            doc_len,
            avg_doc_len,
            doc_vectors,
            term_ids,
            postings,
            doc_norms,
        }
    }

    pub fn params(&self) -> Bm25Params {
        self.params
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn doc_id(&self, doc: usize) -> &str {
        &self.doc_ids[doc]
    }

    pub fn term_id(&self, term: &str) -> Option<u32> {
        self.term_ids.get(term).copied()
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn doc_freq(&self, term: u32) -> u32 {
        self.doc_freq[term as usize]
    }

    pub fn doc_len(&self, doc: usize) -> u32 {
        self.doc_len[doc]
    }

    pub fn avg_doc_len(&self) -> f64 {
        self.avg_doc_len
    }

    pub fn doc_vector(&self, doc: usize) -> &SparseVector {
        &self.doc_vectors[doc]
    }

    pub fn idf(&self, term: u32) -> f64 {
        idf(self.len(), self.doc_freq[term as usize])
    }

    /// Vectorizes `text` as if it were a document of its own length, using
    /// this index's statistics. Terms outside the vocabulary are dropped.
    pub fn vectorize(&self, text: &str) -> SparseVector {
        let tokens = tokenize(text);
        let len = tokens.len() as u32;
        let mut tf: BTreeMap<u32, u32> = BTreeMap::new();
        for tok in &tokens {
            if let Some(t) = self.term_id(tok) {
                *tf.entry(t).or_insert(0) += 1;
            }
        }
        let n = self.len();
        SparseVector::from_pairs(tf.into_iter().map(|(t, f)| {
            let w = term_weight(self.params, n, self.doc_freq[t as usize], f, len, self.avg_doc_len);
            (t, w)
        }))
    }

    /// Cosine similarity of `query` against every document sharing at least
    /// one term with it, as `(doc, similarity)` in document order.
    ///
    /// Produces the same values as [`super::cosine`] against each document
    /// vector; documents with similarity 0 are omitted.
    pub fn similarities(&self, query: &SparseVector) -> Vec<(usize, f64)> {
        let qn = query.norm();
        if qn == 0.0 {
            return Vec::new();
        }
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for &(t, qw) in query.entries() {
            if let Some(list) = self.postings.get(t as usize) {
                for &(d, dw) in list {
                    *acc.entry(d).or_insert(0.0) += qw * dw;
                }
            }
        }
        acc.into_iter()
            .filter_map(|(d, dot)| {
                let dn = self.doc_norms[d as usize];
                if dn == 0.0 {
                    return None;
                }
                let s = (dot / (qn * dn)).clamp(0.0, 1.0);
                (s > 0.0).then_some((d as usize, s))
            })
            .collect()
    }

    /// Dense similarity array over all documents.
    pub fn similarity_table(&self, query: &SparseVector) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (d, s) in self.similarities(query) {
            out[d] = s;
        }
        out
    }
}

fn idf(n: usize, df: u32) -> f64 {
    let (n, df) = (n as f64, df as f64);
    ((n - df + 0.5) / (df + 0.5) + 1.0).ln()
}

fn term_weight(p: Bm25Params, n: usize, df: u32, tf: u32, len: u32, avg_len: f64) -> f64 {
    let tf = tf as f64;
    let norm = 1.0 - p.b + p.b * len as f64 / avg_len;
    idf(n, df) * (tf * (p.k1 + 1.0)) / (tf + p.k1 * norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::cosine;

    fn index(docs: &[&str]) -> Bm25Index {
        Bm25Index::build(
            docs.iter().enumerate().map(|(i, d)| (format!("d{i}"), *d)),
            Bm25Params::default(),
        )
        .unwrap()
    }

    #[test]
    fn empty_corpus_rejected() {
        let docs: Vec<(String, String)> = Vec::new();
        assert!(Bm25Index::build(docs, Bm25Params::default()).is_err());
    }

    #[test]
    fn single_doc_idf() {
        let idx = index(&["gravity pulls objects down"]);
        let expected = (0.5f64 / 1.5 + 1.0).ln();
        for t in 0..idx.vocabulary().len() as u32 {
            assert_eq!(idx.idf(t), expected);
        }
    }

    #[test]
    fn doc_freq_counts() {
        let idx = index(&["a b", "a c"]);
        assert_eq!(idx.doc_freq(idx.term_id("a").unwrap()), 2);
        assert_eq!(idx.doc_freq(idx.term_id("b").unwrap()), 1);
        assert_eq!(idx.doc_freq(idx.term_id("c").unwrap()), 1);
    }

    /// Weights for a 5-doc corpus computed independently (Python, float64)
    /// from the BM25 formula with k1 = 1.2, b = 0.75.
    #[test]
    fn five_doc_table() {
        let idx = index(&[
            "the ball falls",
            "gravity pulls the ball down",
            "friction stops the ball",
            "ice is slippery",
            "the the ball",
        ]);
        assert_eq!(idx.avg_doc_len(), 18.0 / 5.0);
        let w = |doc: usize, term: &str| idx.doc_vector(doc).get(idx.term_id(term).unwrap());
        let cases = [
            (0, "the", 0.3087319801921551),
            (0, "ball", 0.3087319801921551),
            (0, "falls", 1.4877305338847608),
            (1, "gravity", 1.196018664495592),
            (1, "the", 0.24819629780153643),
            (3, "ice", 1.4877305338847608),
            (4, "the", 0.4150167602583068),
            (4, "ball", 0.3087319801921551),
        ];
        for (doc, term, expected) in cases {
            let got = w(doc, term);
            assert!((got - expected).abs() < 1e-12, "doc {doc} term {term}: {got} vs {expected}");
        }
    }

    #[test]
    fn identical_text_has_cosine_one() {
        let idx = index(&["friction acts to counter motion", "gravity pulls"]);
        let q = idx.vectorize("friction acts to counter motion");
        assert!((cosine(&q, idx.doc_vector(0)) - 1.0).abs() < 1e-12);
        assert_eq!(cosine(&q, idx.doc_vector(1)), 0.0);
    }

    #[test]
    fn inverted_similarities_match_direct_cosine() {
        let idx = index(&["a b c", "b c d d", "e f", "a a a"]);
        let q = idx.vectorize("a d x y");
        let table = idx.similarity_table(&q);
        for (d, &s) in table.iter().enumerate() {
            assert_eq!(s, cosine(&q, idx.doc_vector(d)));
        }
    }

    #[test]
    fn avg_doc_len_invariant() {
        let idx = index(&["one two", "three", "four five six seven"]);
        let mean = (0..idx.len()).map(|d| idx.doc_len(d) as f64).sum::<f64>() / idx.len() as f64;
        assert!((idx.avg_doc_len() - mean).abs() <= 1e-9 * mean);
        for t in 0..idx.vocabulary().len() as u32 {
            assert!(idx.doc_freq(t) as usize <= idx.len());
        }
    }

    #[test]
    fn build_is_deterministic() {
        let docs = ["x y z", "y z w", "w"];
        let (a, b) = (index(&docs), index(&docs));
        assert_eq!(a.vocabulary(), b.vocabulary());
        for d in 0..a.len() {
            assert_eq!(a.doc_vector(d), b.doc_vector(d));
        }
    }

    #[test]
    fn serde_restores_derived_state() {
        let idx = index(&["a b", "b c"]);
        let json = serde_json::to_string(&idx).unwrap();
        let back: Bm25Index = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        let q = back.vectorize("b c");
        assert_eq!(back.similarity_table(&q), idx.similarity_table(&idx.vectorize("b c")));
    }
}
