//! Effective configuration: command-line flags over the config file over
//! built-in defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use revrank_core::corpus::ParseOptions;
use revrank_core::dataset::{FeatureCase, SmoteScope};
use revrank_core::evaluation::RankMode;
use revrank_core::pipeline::{ClassifierKind, PipelineConfig, RegressorKind};
use revrank_core::text::LexiconPaths;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DATA_DIR_ENV: &str = "REVRANK_DATA_DIR";

/// Keys accepted in the config file. All optional; unknown keys are errors.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub case: Option<u8>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub smote_scope: Option<String>,
    pub smote_k: Option<usize>,
    pub normalize_for_knn: Option<bool>,
    pub train_fraction: Option<f64>,
    pub classifier: Option<String>,
    pub regressor: Option<String>,
    pub n_trees: Option<usize>,
    pub max_features: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: Option<usize>,
    pub bootstrap: Option<bool>,
    pub gb_stages: Option<usize>,
    pub learning_rate: Option<f64>,
    pub gb_max_depth: Option<usize>,
    pub gb_min_samples_leaf: Option<usize>,
    pub max_reject_fraction: Option<f64>,
    pub data_dir: Option<PathBuf>,
    pub pos_lexicon: Option<PathBuf>,
    pub familiar_words: Option<PathBuf>,
    pub english_words: Option<PathBuf>,
    pub verbose: Option<u8>,
    pub quiet: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let err = |reason: String| CliError::Config {
            path: path.to_path_buf(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        toml::from_str(&text).map_err(|e| err(e.message().to_string()))
    }
}

/// Pipeline settings that may come from flags; each overrides the file.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineFlags {
    /// Feature case 1..4 (4 = all seventeen features).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub case: Option<u8>,
    /// Random seed for the split, SMOTE and the learners.
    #[arg(long)]
    pub seed: Option<u64>,
    /// with-classifier or without-classifier.
    #[arg(long)]
    pub mode: Option<String>,
    /// Length of the top list compared against actual votes.
    #[arg(long)]
    pub k: Option<usize>,
    /// train-only or pre-split.
    #[arg(long)]
    pub smote_scope: Option<String>,
    /// SMOTE neighbour count.
    #[arg(long)]
    pub smote_k: Option<usize>,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// rf or nb.
    #[arg(long)]
    pub classifier: Option<String>,
    /// gb or ols.
    #[arg(long)]
    pub regressor: Option<String>,
    /// Trees in the random forest.
    #[arg(long)]
    pub n_trees: Option<usize>,
    /// Features tried per split (default: floor of the square root).
    #[arg(long)]
    pub max_features: Option<usize>,
    /// Forest tree depth limit.
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    /// Boosting stages.
    #[arg(long)]
    pub gb_stages: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub gb_max_depth: Option<usize>,
}

/// Word-list locations and logging, shared by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalFlags {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory holding replacement word lists (default: $REVRANK_DATA_DIR).
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// Part-of-speech lexicon (word TAG [TAG ...] per line).
    #[arg(long, global = true)]
    pub pos_lexicon: Option<PathBuf>,
    /// Dale-Chall familiar word list.
    #[arg(long, global = true)]
    pub familiar_words: Option<PathBuf>,
    /// English dictionary for the wrong-words feature.
    #[arg(long, global = true)]
    pub english_words: Option<PathBuf>,
    /// Only log errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,
    /// More logging; repeat for debug output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordLists {
    pub data_dir: Option<PathBuf>,
    pub pos_lexicon: Option<PathBuf>,
    pub familiar_words: Option<PathBuf>,
    pub english_words: Option<PathBuf>,
}

impl WordLists {
    pub fn paths(&self) -> LexiconPaths {
        LexiconPaths {
            data_dir: self.data_dir.clone(),
            pos_lexicon: self.pos_lexicon.clone(),
            familiar_words: self.familiar_words.clone(),
            english_words: self.english_words.clone(),
        }
    }
}

/// Everything a command runs with; serialized into its JSON outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub pipeline: PipelineConfig,
    /// True when the case came from a flag or the file rather than the default.
    #[serde(skip)]
    pub case_explicit: bool,
    pub max_reject_fraction: f64,
    pub word_lists: WordLists,
}

impl RunConfig {
    pub fn parse_options(&self) -> ParseOptions {
        ParseOptions {
            max_reject_fraction: self.max_reject_fraction,
        }
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("configuration serializes")
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Usage(format!("{key}: {e}")))
}

/// The log level implied by flags and file, flags first.
pub fn log_level(global: &GlobalFlags, file: &FileConfig) -> log::LevelFilter {
    let quiet = global.quiet || (global.verbose == 0 && file.quiet.unwrap_or(false));
    let verbose = if global.verbose > 0 {
        global.verbose
    } else {
        file.verbose.unwrap_or(0)
    };
    match (quiet, verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        (false, _) => log::LevelFilter::Debug,
    }
}

/// Merges flags, file and `base`, then validates the result before any work
/// starts. `base` is the built-in default, or the configuration recorded
/// with trained models. `env_data_dir` is the value of `REVRANK_DATA_DIR`.
pub fn resolve(
    flags: &PipelineFlags,
    global: &GlobalFlags,
    file: &FileConfig,
    base: PipelineConfig,
    max_reject_fraction: Option<f64>,
    env_data_dir: Option<PathBuf>,
) -> Result<RunConfig> {
    let mut p = base;

    let case = flags.case.or(file.case);
    if let Some(n) = case {
        p.case = FeatureCase::try_from(n).map_err(|e| CliError::Usage(format!("case: {e}")))?;
    }
    if let Some(m) = flags.mode.as_deref().or(file.mode.as_deref()) {
        p.mode = parse::<RankMode>("mode", m)?;
    }
    if let Some(s) = flags.seed.or(file.seed) {
        p.seed = s;
    }
    if let Some(k) = flags.k.or(file.k) {
        p.k = k;
    }
    if let Some(s) = flags.smote_scope.as_deref().or(file.smote_scope.as_deref()) {
        p.smote_scope = parse::<SmoteScope>("smote_scope", s)?;
    }
    if let Some(k) = flags.smote_k.or(file.smote_k) {
        p.smote.k = k;
    }
    if let Some(n) = file.normalize_for_knn {
        p.smote.normalize_for_knn = n;
    }
    if let Some(f) = flags.train_fraction.or(file.train_fraction) {
        p.train_fraction = f;
    }
    if let Some(c) = flags.classifier.as_deref().or(file.classifier.as_deref()) {
        p.classifier = parse::<ClassifierKind>("classifier", c)?;
    }
    if let Some(r) = flags.regressor.as_deref().or(file.regressor.as_deref()) {
        p.regressor = parse::<RegressorKind>("regressor", r)?;
    }
    if let Some(n) = flags.n_trees.or(file.n_trees) {
        p.forest.n_trees = n;
    }
    if let Some(m) = flags.max_features.or(file.max_features) {
        p.forest.max_features = Some(m);
    }
    if let Some(d) = flags.max_depth.or(file.max_depth) {
        p.forest.max_depth = Some(d);
    }
    if let Some(m) = flags.min_samples_leaf.or(file.min_samples_leaf) {
        p.forest.min_samples_leaf = m;
    }
    if let Some(b) = file.bootstrap {
        p.forest.bootstrap = b;
    }
    if let Some(n) = flags.gb_stages.or(file.gb_stages) {
        p.boosting.n_stages = n;
    }
    if let Some(lr) = flags.learning_rate.or(file.learning_rate) {
        p.boosting.learning_rate = lr;
    }
    if let Some(d) = flags.gb_max_depth.or(file.gb_max_depth) {
        p.boosting.max_depth = d;
    }
    if let Some(m) = file.gb_min_samples_leaf {
        p.boosting.min_samples_leaf = m;
    }
    p.validate()?;

    let max_reject_fraction = max_reject_fraction
        .or(file.max_reject_fraction)
        .unwrap_or(ParseOptions::default().max_reject_fraction);
    if !(0.0..=1.0).contains(&max_reject_fraction) {
        return Err(CliError::Usage(format!(
            "max_reject_fraction {max_reject_fraction} outside [0, 1]"
        )));
    }
    let pick = |flag: &Option<PathBuf>, from_file: &Option<PathBuf>| flag.clone().or_else(|| from_file.clone());
    let word_lists = WordLists {
        data_dir: pick(&global.data_dir, &file.data_dir).or(env_data_dir),
        pos_lexicon: pick(&global.pos_lexicon, &file.pos_lexicon),
        familiar_words: pick(&global.familiar_words, &file.familiar_words),
        english_words: pick(&global.english_words, &file.english_words),
    };
    Ok(RunConfig {
        pipeline: p,
        case_explicit: case.is_some(),
        max_reject_fraction,
        word_lists,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(text: &str) -> FileConfig {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let f = file("seed = 7\nk = 5\nclassifier = \"nb\"\n");
        let flags = PipelineFlags {
            seed: Some(9),
            ..Default::default()
        };
        let c = resolve(&flags, &GlobalFlags::default(), &f, PipelineConfig::default(), None, None).unwrap();
        assert_eq!(c.pipeline.seed, 9);
        assert_eq!(c.pipeline.k, 5);
        assert_eq!(c.pipeline.classifier, ClassifierKind::Nb);
        assert_eq!(c.pipeline.regressor, RegressorKind::Gb);
        assert!(!c.case_explicit);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("sed = 1\n").is_err());
    }

    #[test]
    fn invalid_values_fail_before_work() {
        let bad = [
            "case = 5",
            "mode = \"sideways\"",
            "k = 0",
            "learning_rate = 1.5",
            "smote_scope = \"never\"",
            "train_fraction = 1.0",
        ];
        for text in bad {
            let r = resolve(&PipelineFlags::default(), &GlobalFlags::default(), &file(text), PipelineConfig::default(), None, None);
            let e = r.expect_err(text);
            assert_eq!(e.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn data_dir_falls_back_to_environment() {
        let env = Some(PathBuf::from("/env"));
        let c = resolve(&PipelineFlags::default(), &GlobalFlags::default(), &FileConfig::default(), PipelineConfig::default(), None, env.clone())
            .unwrap();
        assert_eq!(c.word_lists.data_dir, env);
        let f = file("data_dir = \"/file\"");
        let c = resolve(&PipelineFlags::default(), &GlobalFlags::default(), &f, PipelineConfig::default(), None, env).unwrap();
        assert_eq!(c.word_lists.data_dir, Some(PathBuf::from("/file")));
    }

    #[test]
    fn quiet_and_verbose_levels() {
        let g = GlobalFlags {
            verbose: 2,
            ..Default::default()
        };
        assert_eq!(log_level(&g, &file("quiet = true")), log::LevelFilter::Debug);
        assert_eq!(log_level(&GlobalFlags::default(), &file("quiet = true")), log::LevelFilter::Error);
        assert_eq!(log_level(&GlobalFlags::default(), &FileConfig::default()), log::LevelFilter::Warn);
    }
}
