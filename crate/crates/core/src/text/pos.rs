//! Lexicon-first part-of-speech tagger with suffix fallbacks.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::text::tokenize::TokenStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    Noun,
    Adjective,
    Verb,
    Adverb,
    Pronoun,
    Determiner,
    Adposition,
    Conjunction,
    Numeral,
    Particle,
    Interjection,
}

impl PosTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PosTag::Noun => "NOUN",
            PosTag::Adjective => "ADJ",
            PosTag::Verb => "VERB",
            PosTag::Adverb => "ADV",
            PosTag::Pronoun => "PRON",
            PosTag::Determiner => "DET",
            PosTag::Adposition => "ADP",
            PosTag::Conjunction => "CONJ",
            PosTag::Numeral => "NUM",
            PosTag::Particle => "PRT",
            PosTag::Interjection => "INTJ",
        }
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PosTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "NOUN" => PosTag::Noun,
            "ADJ" => PosTag::Adjective,
            "VERB" => PosTag::Verb,
            "ADV" => PosTag::Adverb,
            "PRON" => PosTag::Pronoun,
            "DET" => PosTag::Determiner,
            "ADP" => PosTag::Adposition,
            "CONJ" => PosTag::Conjunction,
            "NUM" => PosTag::Numeral,
            "PRT" => PosTag::Particle,
            "INTJ" => PosTag::Interjection,
            other => return Err(format!("unknown tag {other:?}")),
        })
    }
}

/// Suffix rules, checked in order after a lexicon miss. The stem left after
/// removing the suffix must be at least `MIN_STEM` letters.
const SUFFIX_RULES: &[(&str, PosTag)] = &[
    ("ly", PosTag::Adverb),
    ("ing", PosTag::Verb),
    ("ed", PosTag::Verb),
    ("ous", PosTag::Adjective),
    ("ful", PosTag::Adjective),
    ("able", PosTag::Adjective),
    ("ive", PosTag::Adjective),
];

const MIN_STEM: usize = 2;

#[derive(Debug, Clone, Default)]
pub struct PosTagger {
    lexicon: HashMap<String, PosTag>,
}

impl PosTagger {
    pub fn new(lexicon: HashMap<String, PosTag>) -> Self {
        PosTagger { lexicon }
    }

    pub fn lexicon_len(&self) -> usize {
        self.lexicon.len()
    }

    /// Lexicon lookup, then digits-only tokens as numerals, then suffix
    /// rules; anything else is a noun.
    pub fn tag(&self, token: &str) -> PosTag {
        if let Some(&tag) = self.lexicon.get(token) {
            return tag;
        }
        if !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit()) {
            return PosTag::Numeral;
        }
        SUFFIX_RULES
            .iter()
            .find(|(suffix, _)| token.len() >= suffix.len() + MIN_STEM && token.ends_with(suffix))
            .map_or(PosTag::Noun, |&(_, tag)| tag)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PosCounts {
    pub noun: usize,
    pub adjective: usize,
    pub verb: usize,
}

pub fn pos_counts(tagger: &PosTagger, stream: &TokenStream) -> PosCounts {
    stream
        .tokens
        .iter()
        .fold(PosCounts::default(), |mut acc, t| {
            match tagger.tag(t) {
                PosTag::Noun => acc.noun += 1,
                PosTag::Adjective => acc.adjective += 1,
                PosTag::Verb => acc.verb += 1,
                _ => {}
            }
            acc
        })
}
