use std::collections::HashSet;
use std::sync::OnceLock;

const STOPWORDS: &str = include_str!("../../resources/stopwords.txt");

/// The frozen stopword list shipped in `resources/stopwords.txt`.
pub fn stopwords() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_is_loaded() {
        assert!(is_stopword("the"));
        assert!(is_stopword("a"));
        assert!(!is_stopword("ball"));
        assert!(!stopwords().contains("# English function words that can never start a concept."));
    }
}
