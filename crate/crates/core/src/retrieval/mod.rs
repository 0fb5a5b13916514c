//! BM25 sparse vectors, cosine similarity and nearest-neighbour retrieval.
//!
//! Two independent indexes are used by the pipeline: one over the facts KB
//! (relevance of a fact to a hypothesis) and one over the explained
//! hypotheses of the explanations KB (similarity between hypotheses).

mod bm25;
mod knn;
mod sparse;
mod tokenize;

pub use bm25::{Bm25Index, Bm25Params};
pub use knn::{knn, Neighbour};
pub use sparse::{cosine, SparseVector};
pub use tokenize::tokenize;
