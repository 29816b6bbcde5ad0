//! Bundled word lists: POS lexicon, Dale-Chall familiar words and an English
//! dictionary. Each can be replaced by a file with the same format.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::text::pos::{PosTag, PosTagger};

const BUNDLED_LEXICON: &str = include_str!("../../data/pos_lexicon.tsv");
const BUNDLED_FAMILIAR: &str = include_str!("../../data/familiar_words.txt");
const BUNDLED_DICTIONARY: &str = include_str!("../../data/english_words.txt");

pub const LEXICON_FILE: &str = "pos_lexicon.tsv";
pub const FAMILIAR_FILE: &str = "familiar_words.txt";
pub const DICTIONARY_FILE: &str = "english_words.txt";

/// A lowercase word set, one entry per line in its file form.
#[derive(Debug, Clone, Default)]
pub struct WordSet(HashSet<String>);

impl WordSet {
    pub fn parse(contents: &str) -> Self {
        WordSet(
            contents
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_ascii_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let contents = read(path)?;
        let set = Self::parse(&contents);
        if set.0.is_empty() {
            return Err(Error::WordList {
                path: path.to_path_buf(),
                reason: "no entries".into(),
            });
        }
        Ok(set)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for WordSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        WordSet(iter.into_iter().map(Into::into).collect())
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::WordList {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Parses `token<TAB>TAG` lines.
pub fn parse_lexicon(contents: &str, origin: &Path) -> Result<HashMap<String, PosTag>> {
    let mut map = HashMap::new();
    for (i, line) in contents.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (word, tag) = line.split_once('\t').ok_or_else(|| Error::WordList {
            path: origin.to_path_buf(),
            reason: format!("line {}: expected token<TAB>tag", i + 1),
        })?;
        let tag = tag.trim().parse::<PosTag>().map_err(|e| Error::WordList {
            path: origin.to_path_buf(),
            reason: format!("line {}: {e}", i + 1),
        })?;
        map.insert(word.trim().to_ascii_lowercase(), tag);
    }
    Ok(map)
}

/// Everything the text features need besides the text itself.
#[derive(Debug, Clone)]
pub struct Lexicons {
    pub tagger: PosTagger,
    pub familiar: WordSet,
    pub dictionary: WordSet,
}

/// Optional overrides; `None` falls back to `data_dir`, then to the bundled copy.
#[derive(Debug, Clone, Default)]
pub struct LexiconPaths {
    pub data_dir: Option<PathBuf>,
    pub pos_lexicon: Option<PathBuf>,
    pub familiar_words: Option<PathBuf>,
    pub english_words: Option<PathBuf>,
}

impl LexiconPaths {
    fn resolve(&self, explicit: &Option<PathBuf>, file: &str) -> Option<PathBuf> {
        explicit.clone().or_else(|| {
            self.data_dir
                .as_ref()
                .map(|d| d.join(file))
                .filter(|p| p.exists())
        })
    }
}

impl Lexicons {
    /// The bundled lists, parsed once per process.
    pub fn bundled() -> Arc<Lexicons> {
        static BUNDLED: OnceLock<Arc<Lexicons>> = OnceLock::new();
        BUNDLED
            .get_or_init(|| {
                let lexicon = parse_lexicon(BUNDLED_LEXICON, Path::new(LEXICON_FILE))
                    .expect("bundled lexicon is well formed");
                Arc::new(Lexicons {
                    tagger: PosTagger::new(lexicon),
                    familiar: WordSet::parse(BUNDLED_FAMILIAR),
                    dictionary: WordSet::parse(BUNDLED_DICTIONARY),
                })
            })
            .clone()
    }

    pub fn load(paths: &LexiconPaths) -> Result<Arc<Lexicons>> {
        let lexicon = paths.resolve(&paths.pos_lexicon, LEXICON_FILE);
        let familiar = paths.resolve(&paths.familiar_words, FAMILIAR_FILE);
        let dictionary = paths.resolve(&paths.english_words, DICTIONARY_FILE);
        if lexicon.is_none() && familiar.is_none() && dictionary.is_none() {
            return Ok(Self::bundled());
        }
        let bundled = Self::bundled();
        let tagger = match lexicon {
            Some(p) => PosTagger::new(parse_lexicon(&read(&p)?, &p)?),
            None => bundled.tagger.clone(),
        };
        let familiar = match familiar {
            Some(p) => WordSet::load(&p)?,
            None => bundled.familiar.clone(),
        };
        let dictionary = match dictionary {
            Some(p) => WordSet::load(&p)?,
            None => bundled.dictionary.clone(),
        };
        Ok(Arc::new(Lexicons {
            tagger,
            familiar,
            dictionary,
        }))
    }
}
