//! Description and question similarity: cosine between binary bags of words.

use std::collections::BTreeSet;

use crate::corpus::{ProductDescription, QACollection, Review};
use crate::text::tokenize::words;

/// The distinct tokens of one document (presence only, no counts).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BinaryBagOfWords(BTreeSet<String>);

impl BinaryBagOfWords {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for BinaryBagOfWords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        BinaryBagOfWords(iter.into_iter().map(Into::into).collect())
    }
}

pub fn build_bow(text: &str) -> BinaryBagOfWords {
    words(text).into_iter().collect()
}

/// `|a ∩ b| / (√|a| · √|b|)`, or 0 when either side is empty.
pub fn cosine_similarity(a: &BinaryBagOfWords, b: &BinaryBagOfWords) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let shared = small.0.iter().filter(|t| large.0.contains(*t)).count();
    // sqrt of the exact product keeps identical sets at exactly 1.0
    shared as f64 / ((a.len() * b.len()) as f64).sqrt()
}

pub fn text_similarity(a: &str, b: &str) -> f64 {
    cosine_similarity(&build_bow(a), &build_bow(b))
}

pub fn desc_sim(review: &Review, desc: &ProductDescription) -> f64 {
    text_similarity(&desc.description_text, &review.text)
}

/// Similarity against all of the product's questions joined into one document.
pub fn qa_sim(review: &Review, qa: &QACollection) -> f64 {
    if qa.questions.is_empty() {
        return 0.0;
    }
    text_similarity(&qa.questions.join(" "), &review.text)
}
