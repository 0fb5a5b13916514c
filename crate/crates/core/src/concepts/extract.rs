use super::stopwords::is_stopword;
use super::{ConceptSet, Lexicon};
use crate::retrieval::tokenize;

/// Suffix-stripping lemma candidates for a surface token, most specific first
/// (`"slipping"` yields `"slipp"`, `"slippe"`, `"slip"`).
pub fn lemma_candidates(token: &str) -> Vec<String> {
    let mut out = Vec::new();
    let strip = |suffix: &str| token.strip_suffix(suffix).filter(|s| s.len() >= 2);
    if let Some(stem) = strip("ies") {
        out.push(format!("{stem}y"));
    }
    if let Some(stem) = strip("es") {
        out.push(stem.to_owned());
    }
    if !token.ends_with("ss") {
        if let Some(stem) = strip("s") {
            out.push(stem.to_owned());
        }
    }
    if let Some(stem) = strip("ied") {
        out.push(format!("{stem}y"));
    }
    for suffix in ["ing", "ed"] {
        if let Some(stem) = strip(suffix) {
            out.push(stem.to_owned());
            out.push(format!("{stem}e"));
            if let Some(undoubled) = undouble(stem) {
                out.push(undoubled);
            }
        }
    }
    out
}

fn undouble(stem: &str) -> Option<String> {
    let b = stem.as_bytes();
    let n = b.len();
    (n >= 3 && b[n - 1] == b[n - 2] && !b"aeiou".contains(&b[n - 1])).then(|| stem[..n - 1].to_owned())
}

/// Greedy leftmost-longest concept matcher over a lexicon.
#[derive(Debug, Clone, Copy)]
pub struct ConceptExtractor<'a> {
    lexicon: &'a Lexicon,
}

impl<'a> ConceptExtractor<'a> {
    pub fn new(lexicon: &'a Lexicon) -> Self {
        ConceptExtractor { lexicon }
    }

    pub fn extract(&self, text: &str) -> ConceptSet {
        let tokens = tokenize(text);
        let mut concepts = ConceptSet::new();
        let mut i = 0;
        while i < tokens.len() {
            if is_stopword(&tokens[i]) {
                i += 1;
                continue;
            }
            match self.longest_at(&tokens[i..]) {
                Some((width, concept)) => {
                    concepts.insert(concept);
                    i += width;
                }
                None => i += 1,
            }
        }
        concepts
    }

    /// Longest lemma match starting at `tokens[0]`, as `(width, lemma)`.
    fn longest_at(&self, tokens: &[String]) -> Option<(usize, String)> {
        let max = self.lexicon.max_lemma_len().min(tokens.len());
        for width in (1..=max).rev() {
            let window = &tokens[..width];
            let raw = window.join(" ");
            if self.lexicon.contains(&raw) {
                return Some((width, raw));
            }
            let head = window[..width - 1].join(" ");
            for candidate in lemma_candidates(&window[width - 1]) {
                let key = if head.is_empty() {
                    candidate
                } else {
                    format!("{head} {candidate}")
                };
                if self.lexicon.contains(&key) {
                    return Some((width, key));
                }
            }
        }
        None
    }
}

pub fn extract_concepts(text: &str, lexicon: &Lexicon) -> ConceptSet {
    ConceptExtractor::new(lexicon).extract(text)
}
