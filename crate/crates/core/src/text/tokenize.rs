use std::ops::Range;

use crate::error::{Error, Result};

/// Lowercase alphanumeric tokens with sentence boundaries.
///
/// `sentences` are contiguous index ranges into `tokens` that partition
/// `0..tokens.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    pub sentences: Vec<Range<usize>>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    pub fn sentence(&self, i: usize) -> &[String] {
        &self.tokens[self.sentences[i].clone()]
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Splits text into tokens (maximal ASCII alphanumeric runs, lowercased) and
/// sentences (ended by `.`, `!` or `?`; empty sentences discarded).
pub fn tokenize(text: &str) -> Result<TokenStream> {
    let tokens = tokens_with_breaks(text);
    let mut stream = TokenStream {
        tokens: Vec::new(),
        sentences: Vec::new(),
    };
    let mut start = 0;
    for item in tokens {
        match item {
            Piece::Token(t) => stream.tokens.push(t),
            Piece::Break => {
                if stream.tokens.len() > start {
                    stream.sentences.push(start..stream.tokens.len());
                    start = stream.tokens.len();
                }
            }
        }
    }
    if stream.tokens.len() > start {
        stream.sentences.push(start..stream.tokens.len());
    }
    if stream.tokens.is_empty() {
        return Err(Error::EmptyText);
    }
    Ok(stream)
}

/// Token list without sentence structure; empty input gives an empty list.
pub fn words(text: &str) -> Vec<String> {
    tokens_with_breaks(text)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Token(t) => Some(t),
            Piece::Break => None,
        })
        .collect()
}

enum Piece {
    Token(String),
    Break,
}

fn tokens_with_breaks(text: &str) -> Vec<Piece> {
    let mut out = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_ascii_alphanumeric() {
            current.push(c.to_ascii_lowercase());
            continue;
        }
        if !current.is_empty() {
            out.push(Piece::Token(std::mem::take(&mut current)));
        }
        if is_terminator(c) {
            out.push(Piece::Break);
        }
    }
    if !current.is_empty() {
        out.push(Piece::Token(current));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_sentences_and_tokens() {
        let s = tokenize("I love it. Works great!").unwrap();
        assert_eq!(s.tokens, vec!["i", "love", "it", "works", "great"]);
        assert_eq!(s.sentences, vec![0..3, 3..5]);
    }

    #[test]
    fn keeps_alphanumeric_runs() {
        let s = tokenize("11000mAh power").unwrap();
        assert_eq!(s.tokens, vec!["11000mah", "power"]);
        assert_eq!(s.sentence_count(), 1);
    }

    #[test]
    fn punctuation_only_is_an_error() {
        assert!(matches!(tokenize("..."), Err(Error::EmptyText)));
        assert!(matches!(tokenize(""), Err(Error::EmptyText)));
    }

    #[test]
    fn discards_empty_sentences() {
        let s = tokenize("Wow!!! Really?? yes").unwrap();
        assert_eq!(s.sentences, vec![0..1, 1..2, 2..3]);
        assert_eq!(s.sentence(1), ["really"]);
    }

    #[test]
    fn non_ascii_letters_separate_tokens() {
        assert_eq!(words("caf\u{e9}s ok"), vec!["caf", "s", "ok"]);
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        proptest! {
            #[test]
            fn sentences_partition_tokens(s in "[a-zA-Z0-9 .!?,]{1,80}") {
                if let Ok(stream) = tokenize(&s) {
                    let mut next = 0;
                    for r in &stream.sentences {
                        prop_assert_eq!(r.start, next);
                        prop_assert!(r.end > r.start);
                        next = r.end;
                    }
                    prop_assert_eq!(next, stream.tokens.len());
                    for t in &stream.tokens {
                        prop_assert!(t.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()));
                    }
                }
            }
        }
    }
}
