use serde::{Deserialize, Serialize};

use super::{Bm25Index, SparseVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbour {
    /// Document position in the index (entry position in the explanations KB).
    pub entry: usize,
    pub similarity: f64,
}

/// Top-`k` documents of `index` by cosine similarity to `query`, descending,
/// ties broken by document position. Zero-similarity documents are ranked
/// too, so `k >= index.len()` returns every document.
pub fn knn(index: &Bm25Index, query: &SparseVector, k: usize) -> Vec<Neighbour> {
    if k == 0 {
        return Vec::new();
    }
    let mut ranked: Vec<Neighbour> = index
        .similarity_table(query)
        .into_iter()
        .enumerate()
        .map(|(entry, similarity)| Neighbour { entry, similarity })
        .collect();
    ranked.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then(a.entry.cmp(&b.entry))
    });
    ranked.truncate(k);
    ranked
}
