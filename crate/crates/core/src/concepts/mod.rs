//! Concept sets and their extraction from text against a WordNet lexicon.
//!
//! A concept is the longest run of tokens, starting at a non-stopword, whose
//! normalized form is a lemma in the lexicon ("living thing", "ball").
//! Two sentences are conceptually connected when their concept sets
//! intersect.

mod extract;
mod lexicon;
mod stopwords;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use extract::{extract_concepts, lemma_candidates, ConceptExtractor};
pub use lexicon::{
    normalize_lemma, Edge, Lexicon, LexiconBuilder, LexiconStats, Pos, Relation, Synset, SynsetId,
};
pub use stopwords::{is_stopword, stopwords};

/// Set of normalized (lowercase, space-joined) concept strings.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConceptSet(BTreeSet<String>);

impl ConceptSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, concept: impl Into<String>) -> bool {
        self.0.insert(concept.into())
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.0.contains(concept)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.0.iter().map(String::as_str)
    }

    pub fn intersects(&self, other: &ConceptSet) -> bool {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.0.iter().any(|c| large.0.contains(c))
    }

    pub fn intersection<'a>(&'a self, other: &'a ConceptSet) -> impl Iterator<Item = &'a str> + 'a {
        self.0.intersection(&other.0).map(String::as_str)
    }

    pub fn extend_from(&mut self, other: &ConceptSet) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn as_set(&self) -> &BTreeSet<String> {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for ConceptSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        ConceptSet(iter.into_iter().map(Into::into).collect())
    }
}

impl IntoIterator for ConceptSet {
    type Item = String;
    type IntoIter = std::collections::btree_set::IntoIter<String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

/// True iff the two concept sets share at least one concept.
pub fn conceptually_connected(a: &ConceptSet, b: &ConceptSet) -> bool {
    a.intersects(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(items: &[&str]) -> ConceptSet {
        items.iter().copied().collect()
    }

    #[test]
    fn connection_examples() {
        assert!(conceptually_connected(&set(&["gravity", "mass"]), &set(&["mass"])));
        assert!(!conceptually_connected(&set(&["gravity"]), &set(&[])));
    }

    fn concept_set() -> impl Strategy<Value = ConceptSet> {
        prop::collection::btree_set("[a-f]{1,2}", 0..8).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn connection_is_symmetric(a in concept_set(), b in concept_set()) {
            prop_assert_eq!(conceptually_connected(&a, &b), conceptually_connected(&b, &a));
        }

        #[test]
        fn connection_is_monotone_in_superset(a in concept_set(), extra in concept_set(), b in concept_set()) {
            let mut sup = a.clone();
            sup.extend_from(&extra);
            if conceptually_connected(&a, &b) {
                prop_assert!(conceptually_connected(&sup, &b));
            }
        }
    }
}
