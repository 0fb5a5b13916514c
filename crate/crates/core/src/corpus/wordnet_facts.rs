use std::collections::BTreeSet;

use super::{Fact, Role};
use crate::concepts::{ConceptSet, Lexicon, Relation};

/// Table tag carried by facts synthesized from the lexicon.
pub const WORDNET_TABLE: &str = "WORDNET";

/// Abstractive facts synthesized from lexicon relations of `concepts`:
/// "X is a kind of Y" for each hypernym Y, "Y is a kind of X" for each
/// hyponym Y and "X is the opposite of Y" for each antonym Y. One fact per
/// relation edge, deduplicated by text, sorted by text.
pub fn wordnet_abstractive_facts(concepts: &ConceptSet, lexicon: &Lexicon) -> Vec<Fact> {
    let mut texts = BTreeSet::new();
    for concept in concepts.iter() {
        for &id in lexicon.synsets_of(concept) {
            let Some(synset) = lexicon.synset(id) else {
                continue;
            };
            let word_no = synset.lemmas.iter().position(|l| l == concept).map(|p| p as u16 + 1);
            for edge in &synset.edges {
                let Some(target) = lexicon.synset(edge.target) else {
                    continue;
                };
                let Some(head) = target.lemmas.first() else {
                    continue;
                };
                match edge.relation {
                    Relation::Hypernym => {
                        texts.insert(format!("{concept} is a kind of {head}"));
                    }
                    Relation::Hyponym => {
                        texts.insert(format!("{head} is a kind of {concept}"));
                    }
                    Relation::Antonym => {
                        if edge.source_word.is_some() && edge.source_word != word_no {
                            continue;
                        }
                        let other = edge
                            .target_word
                            .and_then(|w| target.lemmas.get(w as usize - 1))
                            .unwrap_or(head);
                        texts.insert(format!("{concept} is the opposite of {other}"));
                    }
                    Relation::Synonym => {}
                }
            }
        }
    }
    texts
        .into_iter()
        .map(|text| Fact {
            id: format!("wn:{}", text.replace(' ', "_")),
            text,
            table: WORDNET_TABLE.into(),
            role: Role::Abstractive,
            concepts: ConceptSet::new(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concepts::{LexiconBuilder, Pos};

    fn lexicon() -> Lexicon {
        let mut b = LexiconBuilder::new();
        let ball = b.synset(Pos::Noun, &["ball"]);
        let object = b.synset(Pos::Noun, &["object", "physical object"]);
        let toy = b.synset(Pos::Noun, &["toy"]);
        let football = b.synset(Pos::Noun, &["football"]);
        b.hypernym(ball, object);
        b.hypernym(ball, toy);
        b.hypernym(football, ball);
        let hot = b.synset(Pos::Adj, &["hot"]);
        let cold = b.synset(Pos::Adj, &["cold"]);
        b.antonym(hot, cold);
        b.build()
    }

    fn texts(concepts: &[&str]) -> Vec<String> {
        let set: ConceptSet = concepts.iter().copied().collect();
        wordnet_abstractive_facts(&set, &lexicon())
            .into_iter()
            .map(|f| f.text)
            .collect()
    }

    #[test]
    fn hypernym_template() {
        assert!(texts(&["ball"]).contains(&"ball is a kind of object".to_owned()));
    }

    #[test]
    fn empty_and_unknown_concepts() {
        assert!(texts(&[]).is_empty());
        assert!(texts(&["unicorn"]).is_empty());
    }

    #[test]
    fn one_fact_per_edge() {
        // ball: 2 hypernym edges + 1 hyponym edge; hot: 1 antonym edge
        let got = texts(&["ball", "hot"]);
        assert_eq!(
            got,
            vec![
                "ball is a kind of object",
                "ball is a kind of toy",
                "football is a kind of ball",
                "hot is the opposite of cold",
            ]
        );
        let facts = wordnet_abstractive_facts(&["ball"].into_iter().collect(), &lexicon());
        assert!(facts.iter().all(|f| f.role == Role::Abstractive && f.table == WORDNET_TABLE));
    }
}
