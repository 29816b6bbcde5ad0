//! The fifteen review-text features.

pub mod lexical;
pub mod pos;
pub mod readability;
pub mod tokenize;
pub mod wordlists;

use serde::{Deserialize, Serialize};

pub use lexical::{lexical_stats, word_entropy, wrong_words_count, LexicalStats};
pub use pos::{pos_counts, PosCounts, PosTag, PosTagger};
pub use readability::{dale_chall_score, flesch_reading_ease, syllable_count, DaleChall};
pub use tokenize::{tokenize, TokenStream};
pub use wordlists::{LexiconPaths, Lexicons, WordSet};

use crate::corpus::Review;
use crate::error::Result;

/// Field order matches the leading fifteen entries of
/// [`crate::dataset::FEATURE_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextFeatureSet {
    pub noun: usize,
    pub adjective: usize,
    pub verb: usize,
    pub flesch_reading_ease: f64,
    pub dale_chall_re: f64,
    pub difficult_words: usize,
    pub length: usize,
    pub set_length: usize,
    pub wrong_words: usize,
    pub one_letter_words: usize,
    pub two_letter_words: usize,
    pub longer_letter_words: usize,
    pub lex_diversity: f64,
    pub entropy: f64,
    pub rating: u8,
}

impl TextFeatureSet {
    pub fn to_vec(&self) -> Vec<f64> {
        vec![
            self.noun as f64,
            self.adjective as f64,
            self.verb as f64,
            self.flesch_reading_ease,
            self.dale_chall_re,
            self.difficult_words as f64,
            self.length as f64,
            self.set_length as f64,
            self.wrong_words as f64,
            self.one_letter_words as f64,
            self.two_letter_words as f64,
            self.longer_letter_words as f64,
            self.lex_diversity,
            self.entropy,
            self.rating as f64,
        ]
    }
}

pub fn text_features(text: &str, rating: u8, lexicons: &Lexicons) -> Result<TextFeatureSet> {
    let stream = tokenize(text)?;
    let pos = pos_counts(&lexicons.tagger, &stream);
    let dale = dale_chall_score(&stream, &lexicons.familiar)?;
    let lex = lexical_stats(&stream);
    Ok(TextFeatureSet {
        noun: pos.noun,
        adjective: pos.adjective,
        verb: pos.verb,
        flesch_reading_ease: flesch_reading_ease(&stream)?,
        dale_chall_re: dale.score,
        difficult_words: dale.difficult_words,
        length: lex.length,
        set_length: lex.set_length,
        wrong_words: wrong_words_count(&stream, &lexicons.dictionary),
        one_letter_words: lex.one_letter_words,
        two_letter_words: lex.two_letter_words,
        longer_letter_words: lex.longer_letter_words,
        lex_diversity: lex.lex_diversity,
        entropy: word_entropy(&stream),
        rating,
    })
}

pub fn extract_text_features(review: &Review, lexicons: &Lexicons) -> Result<TextFeatureSet> {
    text_features(&review.text, review.rating, lexicons)
}
