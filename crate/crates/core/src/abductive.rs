//! Abductive reasoning: conceptual abstraction of the hypothesis through
//! candidate abstractive facts, construction of two-hop explanations around
//! each candidate unification fact, and their scoring.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::analogical::{check_lambda, AnalogicalScore, CandidatePools, PoolEntry};
use crate::concepts::ConceptSet;
use crate::corpus::FactsKb;
use crate::error::Result;

/// A hypothesis concept and everything reachable from it through one
/// candidate abstractive fact. Always contains the concept itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionSet {
    pub concept: String,
    pub expanded: ConceptSet,
}

pub fn expansion_sets(hypothesis: &ConceptSet, abstractive: &[PoolEntry], fkb: &FactsKb) -> Vec<ExpansionSet> {
    hypothesis
        .iter()
        .map(|c| {
            let mut expanded: ConceptSet = std::iter::once(c).collect();
            for entry in abstractive {
                let concepts = &fkb.get(entry.fact).concepts;
                if concepts.contains(c) {
                    expanded.extend_from(concepts);
                }
            }
            ExpansionSet {
                concept: c.to_owned(),
                expanded,
            }
        })
        .collect()
}

/// One unification fact with the abstractive facts linking it to the
/// hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationCandidate {
    /// Facts-KB index of the unification fact.
    pub unification: usize,
    /// Facts-KB indices of the attached abstractive facts, in pool order.
    pub abstractive: Vec<usize>,
    pub covered_concepts: ConceptSet,
    pub analogical: AnalogicalScore,
    pub plausibility: f64,
    pub explanatory: f64,
}

/// Builds one candidate per unification fact that shares a concept with at
/// least one expansion set; the others are discarded. Attached abstractive
/// facts are every pooled abstractive fact connected to both the hypothesis
/// and the unification fact.
pub fn construct_explanations(
    hypothesis: &ConceptSet,
    pools: &CandidatePools,
    expansions: &[ExpansionSet],
    fkb: &FactsKb,
    lambdas: (f64, f64),
) -> Result<Vec<ExplanationCandidate>> {
    check_lambda(lambdas.0)?;
    check_lambda(lambdas.1)?;
    let linked: Vec<&PoolEntry> = pools
        .abstractive
        .iter()
        .filter(|a| fkb.get(a.fact).concepts.intersects(hypothesis))
        .collect();

    let mut out = Vec::new();
    for u in &pools.unification {
        let u_concepts = &fkb.get(u.fact).concepts;
        let covered: ConceptSet = expansions
            .iter()
            .filter(|e| e.expanded.intersects(u_concepts))
            .map(|e| e.concept.clone())
            .collect();
        if covered.is_empty() {
            continue;
        }
        let abstractive = linked
            .iter()
            .filter(|a| fkb.get(a.fact).concepts.intersects(u_concepts))
            .map(|a| a.fact)
            .collect();
        let plausibility = plausibility_score(hypothesis, &covered);
        let explanatory = explanatory_score(u.score.combined, plausibility, lambdas.0, lambdas.1)?;
        out.push(ExplanationCandidate {
            unification: u.fact,
            abstractive,
            covered_concepts: covered,
            analogical: u.score,
            plausibility,
            explanatory,
        });
    }
    Ok(out)
}

/// Fraction of hypothesis concepts covered; 0 for a hypothesis without
/// concepts.
pub fn plausibility_score(hypothesis: &ConceptSet, covered: &ConceptSet) -> f64 {
    if hypothesis.is_empty() {
        warn!("plausibility of a hypothesis with no concepts is taken as 0");
        return 0.0;
    }
    covered.len() as f64 / hypothesis.len() as f64
}

pub fn explanatory_score(analogical: f64, plausibility: f64, lambda1: f64, lambda2: f64) -> Result<f64> {
    check_lambda(lambda1)?;
    check_lambda(lambda2)?;
    Ok(lambda1 * analogical + lambda2 * plausibility)
}

/// Sorts candidates by explanatory score, descending, ties by unification
/// fact id.
pub fn rank_candidates(candidates: &mut [ExplanationCandidate], fkb: &FactsKb) {
    candidates.sort_by(|a, b| {
        b.explanatory
            .total_cmp(&a.explanatory)
            .then_with(|| fkb.get(a.unification).id.cmp(&fkb.get(b.unification).id))
    });
}

/// Sum of the `k` largest explanatory scores (all of them when fewer).
pub fn hypothesis_score(candidates: &[ExplanationCandidate], k: usize) -> f64 {
    let mut scores: Vec<f64> = candidates.iter().map(|c| c.explanatory).collect();
    scores.sort_by(|a, b| b.total_cmp(a));
    scores.into_iter().take(k).sum()
}

/// Index of the best score, first wins on ties. The flag is set when no
/// hypothesis scored above 0, in which case the first choice is returned.
pub fn select_answer(scores: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    let fallback = scores.iter().all(|&s| s <= 0.0);
    (if fallback { 0 } else { best }, fallback)
}

/// Checks the structural constraints of an explanation: a single
/// unification fact; every abstractive fact connected to both the
/// hypothesis and the unification; a direct connection when there are no
/// abstractive facts; plausibility in `[0, 1]`.
pub fn check_structure(hypothesis: &ConceptSet, candidate: &ExplanationCandidate, fkb: &FactsKb) -> Result<(), String> {
    let u = &fkb.get(candidate.unification).concepts;
    for &a in &candidate.abstractive {
        let ac = &fkb.get(a).concepts;
        if !ac.intersects(hypothesis) {
            return Err(format!("abstractive fact {} not connected to the hypothesis", fkb.get(a).id));
        }
        if !ac.intersects(u) {
            return Err(format!("abstractive fact {} not connected to the unification", fkb.get(a).id));
        }
    }
    if candidate.abstractive.is_empty() && !u.intersects(hypothesis) {
        return Err(format!(
            "unification {} has no abstraction and no direct connection",
            fkb.get(candidate.unification).id
        ));
    }
    if !(0.0..=1.0).contains(&candidate.plausibility) {
        return Err(format!("plausibility {} out of range", candidate.plausibility));
    }
    Ok(())
}
