//! End-to-end answering: per-hypothesis retrieval, pooling, explanation
//! construction and answer selection over a loaded snapshot.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::abductive::{
    construct_explanations, expansion_sets, hypothesis_score, rank_candidates, select_answer, ExpansionSet,
    ExplanationCandidate,
};
use crate::analogical::{candidate_pools, unification_scores, CandidatePools, PoolSettings};
use crate::config::Config;
use crate::corpus::{FactsKb, Hypothesis};
use crate::error::{Error, Result};
use crate::retrieval::{knn, Bm25Index};
use crate::snapshot::{AnnotatedQuestion, Indexes, Snapshot};

/// Everything computed for one hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisAnalysis {
    pub pools: CandidatePools,
    pub expansions: Vec<ExpansionSet>,
    /// Ranked by explanatory score.
    pub candidates: Vec<ExplanationCandidate>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub label: String,
    pub score: f64,
    pub n_candidates: usize,
    /// The `k_unifications` best candidates.
    pub top_explanations: Vec<ExplanationCandidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredAnswer {
    pub question_id: String,
    pub chosen_label: String,
    pub chosen_index: usize,
    /// No hypothesis scored above zero; the first choice was taken.
    pub fallback: bool,
    pub hypotheses: Vec<HypothesisResult>,
}

pub struct Engine<'a> {
    facts: &'a FactsKb,
    config: Config,
    fact_index: Cow<'a, Bm25Index>,
    ekb_index: Option<Cow<'a, Bm25Index>>,
    explanations: Vec<Vec<usize>>,
}

impl<'a> Engine<'a> {
    /// Uses the snapshot's indexes when they were built with the configured
    /// BM25 parameters, and builds fresh ones otherwise.
    pub fn new(snapshot: &'a Snapshot, config: Config) -> Result<Engine<'a>> {
        config.validate()?;
        let params = config.bm25();
        let (fact_index, ekb_index) = match &snapshot.indexes {
            Some(idx) if idx.facts.params() == params => {
                (Cow::Borrowed(&idx.facts), idx.ekb.as_ref().map(Cow::Borrowed))
            }
            _ => {
                let idx = Indexes::build(&snapshot.facts, &snapshot.ekb, params)?;
                (Cow::Owned(idx.facts), idx.ekb.map(Cow::Owned))
            }
        };
        if fact_index.len() != snapshot.facts.len() {
            return Err(Error::Precondition("fact index does not match the facts KB".into()));
        }
        let explanations = snapshot
            .ekb
            .entries
            .iter()
            .map(|e| e.explanation.iter().filter_map(|id| snapshot.facts.index_of(id)).collect())
            .collect();
        Ok(Engine {
            facts: &snapshot.facts,
            config,
            fact_index,
            ekb_index,
            explanations,
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn facts(&self) -> &FactsKb {
        self.facts
    }

    pub fn analyze(&self, h: &Hypothesis) -> Result<HypothesisAnalysis> {
        let c = &self.config;
        let relevance = self.fact_index.similarities(&self.fact_index.vectorize(&h.text));
        let unification = match (&self.ekb_index, c.use_unification) {
            (Some(ekb), true) => {
                let neighbours = knn(ekb, &ekb.vectorize(&h.text), c.k_neighbours);
                unification_scores(&neighbours, &self.explanations)
            }
            _ => Default::default(),
        };
        let (n_abs, n_unf) = c.pool_sizes();
        let pools = candidate_pools(
            &relevance,
            &unification,
            self.facts,
            PoolSettings {
                n_abs,
                n_unf,
                retrieval_lambdas: c.retrieval_lambdas(),
                scoring_lambdas: c.analogical_lambdas(),
            },
        )?;
        let expansions = expansion_sets(&h.concepts, &pools.abstractive, self.facts);
        let mut candidates =
            construct_explanations(&h.concepts, &pools, &expansions, self.facts, c.explanatory_lambdas())?;
        rank_candidates(&mut candidates, self.facts);
        let score = hypothesis_score(&candidates, c.k_unifications);
        Ok(HypothesisAnalysis {
            pools,
            expansions,
            candidates,
            score,
        })
    }

    pub fn answer(&self, q: &AnnotatedQuestion) -> Result<ScoredAnswer> {
        let mut hypotheses = Vec::with_capacity(q.hypotheses.len());
        for h in &q.hypotheses {
            let mut a = self.analyze(h)?;
            let n_candidates = a.candidates.len();
            a.candidates.truncate(self.config.k_unifications);
            hypotheses.push(HypothesisResult {
                label: h.choice_label.clone(),
                score: a.score,
                n_candidates,
                top_explanations: a.candidates,
            });
        }
        let scores: Vec<f64> = hypotheses.iter().map(|h| h.score).collect();
        let (chosen_index, fallback) = select_answer(&scores);
        if fallback {
            log::debug!("{}: no hypothesis scored above zero", q.record.id);
        }
        Ok(ScoredAnswer {
            question_id: q.record.id.clone(),
            chosen_label: hypotheses[chosen_index].label.clone(),
            chosen_index,
            fallback,
            hypotheses,
        })
    }

    /// Answers every question, in input order. `workers` = 0 lets the
    /// thread pool pick; 1 runs on the calling thread.
    pub fn answer_all(&self, questions: &[&AnnotatedQuestion], workers: usize) -> Result<Vec<ScoredAnswer>> {
        #[cfg(feature = "parallel")]
        if workers != 1 {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            return pool.install(|| questions.par_iter().map(|q| self.answer(q)).collect());
        }
        #[cfg(not(feature = "parallel"))]
        if workers > 1 {
            log::warn!("built without the `parallel` feature; ignoring --workers {workers}");
        }
        questions.iter().map(|q| self.answer(q)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abductive::check_structure;
    use crate::config::Mode;
    use crate::corpus::Split;
    use crate::synthetic::{SyntheticCorpus, SyntheticParams};

    fn snapshot() -> Snapshot {
        SyntheticCorpus::generate(&SyntheticParams::tiny(11)).snapshot(Mode::Worldtree).unwrap()
    }

    #[test]
    fn workers_do_not_change_answers() {
        let snap = snapshot();
        let engine = Engine::new(&snap, Config::default()).unwrap();
        let qs = snap.questions_in(Split::Dev);
        let one = engine.answer_all(&qs, 1).unwrap();
        let four = engine.answer_all(&qs, 4).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.len(), qs.len());
    }

    #[test]
    fn candidates_are_structurally_sound() {
        let snap = snapshot();
        let engine = Engine::new(&snap, Config::default()).unwrap();
        for q in snap.questions_in(Split::Test) {
            for h in &q.hypotheses {
                let a = engine.analyze(h).unwrap();
                for c in &a.candidates {
                    check_structure(&h.concepts, c, &snap.facts).unwrap();
                    assert!((0.0..=1.0).contains(&c.plausibility));
                }
            }
        }
    }

    #[test]
    fn ps_only_preset_answers_every_question() {
        let snap = snapshot();
        let config = Config::default().with_ablation(crate::config::Ablation::PS);
        let engine = Engine::new(&snap, config).unwrap();
        let qs = snap.questions_in(Split::Test);
        assert_eq!(engine.answer_all(&qs, 1).unwrap().len(), qs.len());
    }
}
