//! Step-wise conceptual unification for multiple-choice science questions.
//!
//! The pipeline scores each hypothesis (a candidate answer concatenated with
//! the question) by the explanations that can be built for it from a facts
//! knowledge base:
//!
//! 1. [`analogical`] retrieves candidate abstractive and unification facts,
//!    ranking them by BM25 relevance and by how often they explain the most
//!    similar already-explained hypotheses.
//! 2. [`abductive`] expands the hypothesis concepts through abstractive facts,
//!    keeps the unification facts reachable in one or two hops and scores
//!    them by plausibility and analogical score.
//! 3. The answer is the hypothesis whose top-K explanations score highest.
//!
//! [`engine::Engine`] wires the stages together over an immutable
//! [`snapshot::Snapshot`]; [`eval`] reproduces the accuracy, explanation
//! quality and error-analysis reports.

pub mod abductive;
pub mod analogical;
pub mod concepts;
pub mod config;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod eval;
pub mod output;
pub mod retrieval;
pub mod snapshot;
pub mod synthetic;

pub use config::{Ablation, Config, Mode};
pub use engine::Engine;
pub use error::{Error, Result};
