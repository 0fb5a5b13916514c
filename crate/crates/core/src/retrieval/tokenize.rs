/// Lowercases `text` and splits it on every non-alphanumeric character,
/// dropping empty tokens.
///
/// This is the only tokenizer in the crate: BM25 indexing, lexicon lemma
/// normalization and concept extraction all go through it.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_and_lowercases() {
        assert_eq!(
            tokenize("Friction acts; to COUNTER the object's motion."),
            vec!["friction", "acts", "to", "counter", "the", "object", "s", "motion"]
        );
    }

    #[test]
    fn empty_and_punctuation_only() {
        assert!(tokenize("").is_empty());
        assert!(tokenize(" ;;  -- ").is_empty());
    }
}
