use std::collections::HashMap;

use crate::text::tokenize::TokenStream;
use crate::text::wordlists::WordSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexicalStats {
    pub length: usize,
    pub set_length: usize,
    pub one_letter_words: usize,
    pub two_letter_words: usize,
    pub longer_letter_words: usize,
    pub lex_diversity: f64,
}

pub fn lexical_stats(stream: &TokenStream) -> LexicalStats {
    let mut stats = LexicalStats {
        length: stream.len(),
        set_length: token_counts(stream).len(),
        one_letter_words: 0,
        two_letter_words: 0,
        longer_letter_words: 0,
        lex_diversity: 0.0,
    };
    for t in &stream.tokens {
        match t.len() {
            1 => stats.one_letter_words += 1,
            2 => stats.two_letter_words += 1,
            _ => stats.longer_letter_words += 1,
        }
    }
    if stats.length > 0 {
        stats.lex_diversity = stats.set_length as f64 / stats.length as f64;
    }
    stats
}

/// Tokens missing from `dictionary`; digit-only tokens never count.
pub fn wrong_words_count(stream: &TokenStream, dictionary: &WordSet) -> usize {
    stream
        .tokens
        .iter()
        .filter(|t| !t.bytes().all(|b| b.is_ascii_digit()) && !dictionary.contains(t))
        .count()
}

/// Shannon entropy (bits) of the token frequency distribution.
pub fn word_entropy(stream: &TokenStream) -> f64 {
    let n = stream.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mut counts: Vec<usize> = token_counts(stream).into_values().collect();
    // fixed summation order keeps the result independent of hash iteration
    counts.sort_unstable();
    let h = -counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p.log2()
        })
        .sum::<f64>();
    h.max(0.0)
}

fn token_counts(stream: &TokenStream) -> HashMap<&str, usize> {
    let mut counts = HashMap::new();
    for t in &stream.tokens {
        *counts.entry(t.as_str()).or_insert(0) += 1;
    }
    counts
}
