//! Analogical reasoning: relevance and unification scores, and the
//! candidate abstractive / unification pools built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{FactsKb, Role};
use crate::error::{Error, Result};
use crate::retrieval::Neighbour;

/// `combined = λ1 · relevance + λ2 · unification`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalogicalScore {
    pub relevance: f64,
    pub unification: f64,
    pub combined: f64,
    pub lambdas: (f64, f64),
}

impl AnalogicalScore {
    pub fn new(relevance: f64, unification: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        check_lambda(lambda1)?;
        check_lambda(lambda2)?;
        Ok(AnalogicalScore {
            relevance,
            unification,
            combined: lambda1 * relevance + lambda2 * unification,
            lambdas: (lambda1, lambda2),
        })
    }
}

pub(crate) fn check_lambda(l: f64) -> Result<()> {
    if l.is_finite() && l >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("lambda must be non-negative, got {l}")))
    }
}

/// Unification score of one fact: the similarity-weighted number of
/// neighbours whose explanation contains it. `explanations[e]` lists the fact
/// indices explaining explanations-KB entry `e`.
pub fn unification_score(fact: usize, neighbours: &[Neighbour], explanations: &[Vec<usize>]) -> f64 {
    neighbours
        .iter()
        .filter(|n| explanations[n.entry].contains(&fact))
        .map(|n| n.similarity)
        .sum()
}

/// Unification scores of every fact explaining at least one neighbour.
/// Values are bit-identical to [`unification_score`] per fact.
pub fn unification_scores(neighbours: &[Neighbour], explanations: &[Vec<usize>]) -> BTreeMap<usize, f64> {
    let mut out: BTreeMap<usize, f64> = BTreeMap::new();
    for n in neighbours {
        for &f in &explanations[n.entry] {
            *out.entry(f).or_insert(0.0) += n.similarity;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    /// Index into the facts KB.
    pub fact: usize,
    /// Score the pool is ranked by.
    pub retrieval: f64,
    pub score: AnalogicalScore,
}

/// Candidate abstractive and unification facts for one hypothesis, each
/// ranked by retrieval score (descending, ties by fact id).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CandidatePools {
    pub abstractive: Vec<PoolEntry>,
    pub unification: Vec<PoolEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolSettings {
    pub n_abs: usize,
    pub n_unf: usize,
    /// (relevance, unification) weights for ranking.
    pub retrieval_lambdas: (f64, f64),
    /// (relevance, unification) weights of the analogical score.
    pub scoring_lambdas: (f64, f64),
}

/// Scores every fact with a non-zero relevance or unification score and
/// keeps the top `n_abs` abstractive and `n_unf` unification facts. Facts
/// whose retrieval score is 0 are never pooled.
///
/// `relevance` holds `(fact, rs)` pairs; absent facts have rs = 0.
pub fn candidate_pools(
    relevance: &[(usize, f64)],
    unification: &BTreeMap<usize, f64>,
    fkb: &FactsKb,
    settings: PoolSettings,
) -> Result<CandidatePools> {
    let (rl1, rl2) = settings.retrieval_lambdas;
    let (sl1, sl2) = settings.scoring_lambdas;
    check_lambda(rl1)?;
    check_lambda(rl2)?;

    let mut scores: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
    for &(f, rs) in relevance {
        scores.entry(f).or_default().0 = rs;
    }
    for (&f, &us) in unification {
        scores.entry(f).or_default().1 = us;
    }

    let mut pools = CandidatePools::default();
    for (fact, (rs, us)) in scores {
        let retrieval = rl1 * rs + rl2 * us;
        if retrieval <= 0.0 {
            continue;
        }
        let entry = PoolEntry {
            fact,
            retrieval,
            score: AnalogicalScore::new(rs, us, sl1, sl2)?,
        };
        match fkb.get(fact).role {
            Role::Abstractive => pools.abstractive.push(entry),
            Role::Unification => pools.unification.push(entry),
        }
    }
    for (pool, n) in [
        (&mut pools.abstractive, settings.n_abs),
        (&mut pools.unification, settings.n_unf),
    ] {
        pool.sort_by(|a, b| {
            b.retrieval
                .total_cmp(&a.retrieval)
                .then_with(|| fkb.get(a.fact).id.cmp(&fkb.get(b.fact).id))
        });
        pool.truncate(n);
    }
    Ok(pools)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::ConceptSet;
    use crate::corpus::Fact;
    use proptest::prelude::*;

    fn n(entry: usize, similarity: f64) -> Neighbour {
        Neighbour { entry, similarity }
    }

    #[test]
    fn unification_examples() {
        let expl = vec![vec![0, 1], vec![1], vec![2]];
        assert_eq!(unification_score(3, &[n(0, 0.8), n(1, 0.5)], &expl), 0.0);
        assert_eq!(unification_score(1, &[n(0, 0.8), n(1, 0.5)], &expl), 0.8 + 0.5);
        assert_eq!(unification_score(0, &[], &expl), 0.0);
        let all = unification_scores(&[n(0, 0.8), n(1, 0.5), n(2, 0.1)], &expl);
        for (&f, &s) in &all {
            assert_eq!(s, unification_score(f, &[n(0, 0.8), n(1, 0.5), n(2, 0.1)], &expl));
        }
    }

    #[test]
    fn analogical_examples() {
        let s = AnalogicalScore::new(0.4, 1.3, 1.0, 1.0).unwrap();
        assert!((s.combined - 1.7).abs() < 1e-12);
        let s = AnalogicalScore::new(0.4, 1.3, 2.0, 0.0).unwrap();
        assert_eq!(s.combined, 0.8);
        assert!(AnalogicalScore::new(0.4, 1.3, -1.0, 1.0).is_err());
    }

    fn fkb() -> FactsKb {
        let roles = [
            Role::Abstractive,
            Role::Unification,
            Role::Unification,
            Role::Abstractive,
            Role::Unification,
            Role::Unification,
        ];
        FactsKb::new(
            roles
                .iter()
                .enumerate()
                .map(|(i, &role)| Fact {
                    id: format!("f{i}"),
                    text: format!("fact {i}"),
                    table: "T".into(),
                    role,
                    concepts: ConceptSet::new(),
                })
                .collect(),
        )
    }

    fn settings(n_abs: usize, n_unf: usize) -> PoolSettings {
        PoolSettings {
            n_abs,
            n_unf,
            retrieval_lambdas: (1.0, 1.0),
            scoring_lambdas: (1.0, 1.0),
        }
    }

    /// Brute force over all six facts: score, filter, partition, sort.
    #[test]
    fn pools_match_exhaustive_scoring() {
        let kb = fkb();
        let rs = [(0, 0.3), (1, 0.2), (2, 0.2), (4, 0.05)];
        let us: BTreeMap<usize, f64> = [(2, 0.1), (5, 0.4), (3, 0.0)].into_iter().collect();
        let pools = candidate_pools(&rs, &us, &kb, settings(10, 2)).unwrap();

        let mut brute: Vec<(usize, f64)> = (0..6)
            .map(|f| {
                let r = rs.iter().find(|p| p.0 == f).map_or(0.0, |p| p.1);
                (f, r + us.get(&f).copied().unwrap_or(0.0))
            })
            .filter(|&(_, s)| s > 0.0)
            .collect();
        brute.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        let abs: Vec<usize> = brute.iter().filter(|p| kb.get(p.0).role == Role::Abstractive).map(|p| p.0).collect();
        let unf: Vec<usize> = brute.iter().filter(|p| kb.get(p.0).role == Role::Unification).map(|p| p.0).take(2).collect();
        assert_eq!(pools.abstractive.iter().map(|e| e.fact).collect::<Vec<_>>(), abs);
        assert_eq!(pools.unification.iter().map(|e| e.fact).collect::<Vec<_>>(), unf);
        assert_eq!(unf, vec![5, 2]);
    }

    #[test]
    fn empty_abstractive_pool() {
        let pools = candidate_pools(&[(0, 0.5), (1, 0.5)], &BTreeMap::new(), &fkb(), settings(0, 5)).unwrap();
        assert!(pools.abstractive.is_empty());
        assert_eq!(pools.unification.len(), 1);
    }

    proptest! {
        #[test]
        fn unification_monotone(sims in prop::collection::vec(0.0f64..1.0, 1..6), extra in 0usize..6) {
            let neighbours: Vec<Neighbour> = sims.iter().enumerate().map(|(i, &s)| n(i, s)).collect();
            let mut expl: Vec<Vec<usize>> = vec![vec![]; sims.len()];
            expl[0].push(7);
            let before = unification_score(7, &neighbours, &expl);
            let e = extra % sims.len();
            if !expl[e].contains(&7) { expl[e].push(7); }
            prop_assert!(unification_score(7, &neighbours, &expl) >= before);
        }

        #[test]
        fn analogical_linear_in_lambdas(rs in 0.0f64..1.0, us in 0.0f64..5.0, l1 in 0.0f64..3.0, l2 in 0.0f64..3.0, c in 0.1f64..4.0) {
            let a = AnalogicalScore::new(rs, us, l1, l2).unwrap();
            prop_assert!((a.combined - (l1 * rs + l2 * us)).abs() <= 1e-12);
            let scaled = AnalogicalScore::new(rs, us, c * l1, c * l2).unwrap();
            prop_assert!((scaled.combined - c * a.combined).abs() <= 1e-9 * (1.0 + a.combined));
        }

        #[test]
        fn pools_are_role_pure_and_sorted(rs in prop::collection::vec(0.0f64..1.0, 6), us in prop::collection::vec(0.0f64..1.0, 6)) {
            let kb = fkb();
            let rel: Vec<(usize, f64)> = rs.iter().copied().enumerate().collect();
            let un: BTreeMap<usize, f64> = us.iter().copied().enumerate().collect();
            let pools = candidate_pools(&rel, &un, &kb, settings(2, 2)).unwrap();
            prop_assert!(pools.abstractive.iter().all(|e| kb.get(e.fact).role == Role::Abstractive));
            prop_assert!(pools.unification.iter().all(|e| kb.get(e.fact).role == Role::Unification));
            for pool in [&pools.abstractive, &pools.unification] {
                prop_assert!(pool.windows(2).all(|w| w[0].retrieval >= w[1].retrieval));
                prop_assert!(pool.iter().all(|e| e.retrieval == e.score.combined));
            }
        }
    }
}
