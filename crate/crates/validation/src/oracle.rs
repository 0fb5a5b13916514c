//! Exhaustive reference scorer. Everything is recomputed from raw text for
//! every hypothesis: tokens, concepts, BM25 weights, cosine similarities,
//! neighbours, unification scores, pools, explanations and the answer.

use std::collections::{BTreeMap, BTreeSet};

use swcu_core::Config;

use crate::microkb::{MicroKb, RawQuestion, LEMMAS};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCandidate {
    pub unification: String,
    pub abstractive: Vec<String>,
    pub covered: BTreeSet<String>,
    pub relevance: f64,
    pub unification_score: f64,
    pub analogical: f64,
    pub plausibility: f64,
    pub explanatory: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleHypothesis {
    pub label: String,
    pub concepts: BTreeSet<String>,
    pub abstractive_pool: Vec<String>,
    pub unification_pool: Vec<String>,
    /// Sorted by explanatory score, then unification fact id.
    pub candidates: Vec<OracleCandidate>,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleAnswer {
    pub question_id: String,
    pub hypotheses: Vec<OracleHypothesis>,
    pub chosen: usize,
    pub fallback: bool,
}

fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Leftmost, longest lemma match.
pub fn concepts(text: &str) -> BTreeSet<String> {
    let toks = tokens(text);
    let lemmas: Vec<Vec<&str>> = LEMMAS.iter().map(|l| l.split(' ').collect()).collect();
    let longest = lemmas.iter().map(Vec::len).max().unwrap_or(1);
    let mut out = BTreeSet::new();
    let mut i = 0;
    while i < toks.len() {
        let mut matched = 0;
        for w in (1..=longest.min(toks.len() - i)).rev() {
            if lemmas.iter().any(|l| l.len() == w && l.iter().zip(&toks[i..i + w]).all(|(a, b)| a == b)) {
                matched = w;
                break;
            }
        }
        if matched > 0 {
            out.insert(toks[i..i + matched].join(" "));
            i += matched;
        } else {
            i += 1;
        }
    }
    out
}

/// BM25 statistics of one document collection.
struct Collection {
    docs: Vec<Vec<String>>,
    df: BTreeMap<String, usize>,
    avg_len: f64,
    k1: f64,
    b: f64,
}

impl Collection {
    fn new(texts: &[String], k1: f64, b: f64) -> Collection {
        let docs: Vec<Vec<String>> = texts.iter().map(|t| tokens(t)).collect();
        let mut df = BTreeMap::new();
        for d in &docs {
            for t in d.iter().collect::<BTreeSet<_>>() {
                *df.entry(t.clone()).or_insert(0) += 1;
            }
        }
        let avg_len = docs.iter().map(|d| d.len() as f64).sum::<f64>() / docs.len() as f64;
        Collection { docs, df, avg_len, k1, b }
    }

    /// Weight vector of a token sequence; unknown terms get no weight but
    /// still count towards the length.
    fn vector(&self, toks: &[String]) -> BTreeMap<String, f64> {
        let n = self.docs.len() as f64;
        let len = toks.len() as f64;
        let mut out = BTreeMap::new();
        for t in toks.iter().collect::<BTreeSet<_>>() {
            let Some(&df) = self.df.get(t) else { continue };
            let tf = toks.iter().filter(|x| *x == t).count() as f64;
            let idf = ((n - df as f64 + 0.5) / (df as f64 + 0.5) + 1.0).ln();
            let w = idf * tf * (self.k1 + 1.0) / (tf + self.k1 * (1.0 - self.b + self.b * len / self.avg_len));
            out.insert(t.clone(), w);
        }
        out
    }

    fn similarity(&self, query: &str, doc: usize) -> f64 {
        let q = self.vector(&tokens(query));
        let d = self.vector(&self.docs[doc]);
        let dot: f64 = q.iter().map(|(t, w)| w * d.get(t).copied().unwrap_or(0.0)).sum();
        let norm = |v: &BTreeMap<String, f64>| v.values().map(|w| w * w).sum::<f64>().sqrt();
        let (qn, dn) = (norm(&q), norm(&d));
        if qn == 0.0 || dn == 0.0 {
            0.0
        } else {
            (dot / (qn * dn)).clamp(0.0, 1.0)
        }
    }
}

fn hypothesis(kb: &MicroKb, config: &Config, facts: &Collection, ekb: Option<&Collection>, text: &str, label: &str) -> OracleHypothesis {
    let c = config;
    let h_concepts = concepts(text);
    let fact_concepts: Vec<BTreeSet<String>> = kb.facts.iter().map(|f| concepts(&f.text)).collect();

    // Neighbours and unification scores.
    let mut us = vec![0.0; kb.facts.len()];
    if let (Some(ekb), true) = (ekb, c.use_unification) {
        let mut sims: Vec<(usize, f64)> = (0..kb.train.len()).map(|e| (e, ekb.similarity(text, e))).collect();
        sims.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        sims.truncate(c.k_neighbours);
        for (f, fact) in kb.facts.iter().enumerate() {
            for &(e, sim) in &sims {
                if kb.train[e].gold.contains(&fact.id) {
                    us[f] += sim;
                }
            }
        }
    }

    // Pools are always ranked with the relevance weight; the relevance
    // switch only affects the analogical score.
    let l2 = if c.use_unification { c.lambda2_analogical } else { 0.0 };
    let (ret_l1, ret_l2) = (c.lambda1_analogical, l2);
    let (as_l1, as_l2) = (if c.use_relevance { c.lambda1_analogical } else { 0.0 }, l2);
    let es_l1 = c.lambda1_explanatory;
    let es_l2 = if c.use_plausibility { c.lambda2_explanatory } else { 0.0 };
    let n_abs = if c.use_abstraction { c.n_abs } else { 0 };

    let mut scored: Vec<(usize, f64, f64, f64)> = Vec::new();
    for (f, &u) in us.iter().enumerate() {
        let rs = facts.similarity(text, f);
        let retrieval = ret_l1 * rs + ret_l2 * u;
        if retrieval > 0.0 {
            scored.push((f, retrieval, rs, u));
        }
    }
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(kb.facts[a.0].id.cmp(&kb.facts[b.0].id)));
    let abs_pool: Vec<&(usize, f64, f64, f64)> =
        scored.iter().filter(|s| kb.facts[s.0].abstractive).take(n_abs).collect();
    let unf_pool: Vec<&(usize, f64, f64, f64)> =
        scored.iter().filter(|s| !kb.facts[s.0].abstractive).take(c.n_unf).collect();

    let mut candidates = Vec::new();
    for &&(u, _, rs, us_u) in &unf_pool {
        let cu = &fact_concepts[u];
        // A hypothesis concept is covered when the unification fact mentions
        // it, or when some pooled abstractive fact mentions it and shares a
        // concept with the unification fact.
        let covered: BTreeSet<String> = h_concepts
            .iter()
            .filter(|hc| {
                cu.contains(*hc)
                    || abs_pool.iter().any(|a| {
                        let ca = &fact_concepts[a.0];
                        ca.contains(*hc) && !ca.is_disjoint(cu)
                    })
            })
            .cloned()
            .collect();
        if covered.is_empty() {
            continue;
        }
        let abstractive = abs_pool
            .iter()
            .filter(|a| {
                let ca = &fact_concepts[a.0];
                !ca.is_disjoint(&h_concepts) && !ca.is_disjoint(cu)
            })
            .map(|a| kb.facts[a.0].id.clone())
            .collect();
        let analogical = as_l1 * rs + as_l2 * us_u;
        let plausibility = covered.len() as f64 / h_concepts.len() as f64;
        candidates.push(OracleCandidate {
            unification: kb.facts[u].id.clone(),
            abstractive,
            covered,
            relevance: rs,
            unification_score: us_u,
            analogical,
            plausibility,
            explanatory: es_l1 * analogical + es_l2 * plausibility,
        });
    }
    candidates.sort_by(|a, b| {
        b.explanatory
            .partial_cmp(&a.explanatory)
            .unwrap()
            .then(a.unification.cmp(&b.unification))
    });
    let score = candidates.iter().take(c.k_unifications).map(|x| x.explanatory).sum();
    OracleHypothesis {
        label: label.to_owned(),
        concepts: h_concepts,
        abstractive_pool: abs_pool.iter().map(|s| kb.facts[s.0].id.clone()).collect(),
        unification_pool: unf_pool.iter().map(|s| kb.facts[s.0].id.clone()).collect(),
        candidates,
        score,
    }
}

pub fn solve(kb: &MicroKb) -> Vec<OracleAnswer> {
    let c = &kb.config;
    let facts = Collection::new(&kb.facts.iter().map(|f| f.text.clone()).collect::<Vec<_>>(), c.bm25_k1, c.bm25_b);
    let ekb_texts: Vec<String> = kb.train.iter().map(|q| q.hypothesis(q.correct)).collect();
    let ekb = (!ekb_texts.is_empty()).then(|| Collection::new(&ekb_texts, c.bm25_k1, c.bm25_b));
    kb.eval
        .iter()
        .map(|q: &RawQuestion| {
            let hypotheses: Vec<OracleHypothesis> = (0..q.choices.len())
                .map(|i| hypothesis(kb, c, &facts, ekb.as_ref(), &q.hypothesis(i), RawQuestion::label(i)))
                .collect();
            let best = hypotheses.iter().map(|h| h.score).fold(f64::NEG_INFINITY, f64::max);
            let fallback = best <= 0.0;
            let chosen = if fallback {
                0
            } else {
                hypotheses.iter().position(|h| h.score == best).unwrap()
            };
            OracleAnswer {
                question_id: q.id.clone(),
                hypotheses,
                chosen,
                fallback,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_match_wins() {
        let c = concepts("the heat energy of ice");
        assert_eq!(c, ["heat energy", "ice"].iter().map(|s| s.to_string()).collect());
    }

    #[test]
    fn identical_document_has_similarity_one() {
        let col = Collection::new(&["ice is water".into(), "gravity".into()], 1.2, 0.75);
        assert!((col.similarity("ice is water", 0) - 1.0).abs() < 1e-12);
        assert_eq!(col.similarity("ice is water", 1), 0.0);
    }
}
