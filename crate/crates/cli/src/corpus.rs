//! Word-level tokenizer and vocabulary for the training corpus.

use std::collections::HashMap;

/// The bundled toy corpus: short fables over a small vocabulary, written for
/// this project and dedicated to the public domain (CC0).
pub const TOY_CORPUS: &str = include_str!("../data/toy_corpus.txt");

/// Lowercased words: maximal runs of alphanumerics and apostrophes, with
/// apostrophes trimmed from both ends.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|w| w.trim_matches('\''))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// The `V − 1` most frequent words (ties broken alphabetically) plus an
/// out-of-vocabulary token with id `V − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
}

pub const OOV_TOKEN: &str = "<unk>";

impl Vocab {
    pub fn build(words: &[String], size: usize) -> Vocab {
        assert!(size >= 1, "vocabulary needs room for the out-of-vocabulary token");
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for w in words {
            *freq.entry(w.as_str()).or_default() += 1;
        }
        let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        ranked.truncate(size - 1);
        let oov: u64 = words.len() as u64 - ranked.iter().map(|r| r.1).sum::<u64>();
        let mut vocab_words: Vec<String> = ranked.iter().map(|r| r.0.to_string()).collect();
        let mut counts: Vec<u64> = ranked.iter().map(|r| r.1).collect();
        // Pad so the out-of-vocabulary id is always size − 1.
        while vocab_words.len() < size - 1 {
            vocab_words.push(format!("<pad{}>", vocab_words.len()));
            counts.push(0);
        }
        vocab_words.push(OOV_TOKEN.to_string());
        counts.push(oov);
        let index = vocab_words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Vocab {
            words: vocab_words,
            counts,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn oov_id(&self) -> usize {
        self.words.len() - 1
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    /// Corpus occurrences of word `id`; for the out-of-vocabulary id, of all
    /// words mapped to it.
    pub fn count(&self, id: usize) -> u64 {
        self.counts[id]
    }

    pub fn id(&self, word: &str) -> usize {
        self.index
            .get(word)
            .copied()
            .filter(|&i| i != self.oov_id())
            .unwrap_or(self.oov_id())
    }

    pub fn encode(&self, words: &[String]) -> Vec<usize> {
        words.iter().map(|w| self.id(w)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer_rules() {
        assert_eq!(
            tokenize("The fox's den -- 'quoted' words, AND 42!"),
            vec!["the", "fox's", "den", "quoted", "words", "and", "42"]
        );
        assert!(tokenize("  ...  ").is_empty());
    }

    #[test]
    fn vocabulary_ranking_and_oov() {
        let words = tokenize("b a c a b a d");
        let v = Vocab::build(&words, 3);
        assert_eq!(v.word(0), "a");
        assert_eq!(v.word(1), "b");
        assert_eq!(v.oov_id(), 2);
        assert_eq!(v.encode(&words), vec![1, 0, 2, 0, 1, 0, 2]);
        assert_eq!(v.count(2), 2);
        // Tie between c and d broken alphabetically.
        let v = Vocab::build(&words, 4);
        assert_eq!(v.word(2), "c");
        // A literal "<unk>" in the text is out of vocabulary too.
        assert_eq!(v.id(OOV_TOKEN), 3);
    }

    #[test]
    fn small_corpora_are_padded() {
        let v = Vocab::build(&tokenize("x y"), 5);
        assert_eq!(v.len(), 5);
        assert_eq!(v.oov_id(), 4);
        assert_eq!(v.id("x"), 0);
    }

    #[test]
    fn toy_corpus_is_bundled() {
        let words = tokenize(TOY_CORPUS);
        assert!(words.len() > 5000);
        let v = Vocab::build(&words, 100);
        let oov = v.encode(&words).iter().filter(|&&i| i == v.oov_id()).count();
        assert!((oov as f64) < 0.05 * words.len() as f64);
    }
}
