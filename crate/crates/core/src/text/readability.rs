//! Flesch reading ease and Dale-Chall readability.

use crate::error::{Error, Result};
use crate::text::tokenize::TokenStream;
use crate::text::wordlists::WordSet;

fn is_vowel(b: u8) -> bool {
    matches!(b, b'a' | b'e' | b'i' | b'o' | b'u' | b'y')
}

/// Vowel-group syllable estimate, never below 1.
///
/// A final `e` is silent when it follows a consonant cluster preceded by a
/// single-letter vowel group (`make`, `charge`), except for consonant + `le`
/// (`table`). Digit-only tokens count as one syllable.
pub fn syllable_count(token: &str) -> usize {
    let bytes = token.as_bytes();
    if bytes.is_empty() || bytes.iter().all(u8::is_ascii_digit) {
        return 1;
    }
    let mut groups = 0;
    let mut prev_vowel = false;
    for &b in bytes {
        let v = is_vowel(b);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    if groups > 1 && silent_final_e(bytes) {
        groups -= 1;
    }
    groups.max(1)
}

fn silent_final_e(w: &[u8]) -> bool {
    let n = w.len();
    if n < 3 || w[n - 1] != b'e' || is_vowel(w[n - 2]) {
        return false;
    }
    if w[n - 2] == b'l' && !is_vowel(w[n - 3]) {
        return false;
    }
    // walk back over the consonant cluster before the final e
    let mut i = n - 2;
    while i > 0 && !is_vowel(w[i]) {
        i -= 1;
    }
    if !is_vowel(w[i]) {
        return false;
    }
    i == 0 || !is_vowel(w[i - 1])
}

fn check(stream: &TokenStream) -> Result<()> {
    if stream.tokens.is_empty() || stream.sentences.is_empty() {
        Err(Error::EmptyText)
    } else {
        Ok(())
    }
}

/// `206.835 − 1.015·(words/sentences) − 84.6·(syllables/words)`, unclamped.
pub fn flesch_reading_ease(stream: &TokenStream) -> Result<f64> {
    check(stream)?;
    let words = stream.len() as f64;
    let sentences = stream.sentence_count() as f64;
    let syllables: usize = stream.tokens.iter().map(|t| syllable_count(t)).sum();
    Ok(206.835 - 1.015 * (words / sentences) - 84.6 * (syllables as f64 / words))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DaleChall {
    pub score: f64,
    pub difficult_words: usize,
}

/// Dale-Chall score: `0.1579·pct + 0.0496·(words/sentences)`, plus `3.6365`
/// when more than 5% of the words are outside the familiar list.
pub fn dale_chall_score(stream: &TokenStream, familiar: &WordSet) -> Result<DaleChall> {
    check(stream)?;
    let words = stream.len() as f64;
    let sentences = stream.sentence_count() as f64;
    let difficult_words = stream.tokens.iter().filter(|t| !familiar.contains(t)).count();
    let pct = 100.0 * difficult_words as f64 / words;
    let mut score = 0.1579 * pct + 0.0496 * (words / sentences);
    if pct > 5.0 {
        score += 3.6365;
    }
    Ok(DaleChall {
        score,
        difficult_words,
    })
}
