//! End-to-end runs in the two ranking modes.
//!
//! With a classifier, reviews predicted high quality are ordered by the
//! regressor's vote prediction and every predicted-low-quality review follows
//! them, newest first. Without a classifier, every review is ordered by the
//! prediction of a regressor trained on all reviews.

use std::cmp::Ordering;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, ProductDescription, QACollection, Review};
use crate::dataset::{
    assemble_features, prepare, review_features, FeatureCase, FeatureVector, LabeledDataset, SmoteConfig,
    SmoteScope,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    self, matching_at_k, ClassificationReport, ConfigEcho, EvalReport, MatchingReport, RankMode,
    DEFAULT_K,
};
use crate::learners::{
    BoostingParams, ForestParams, GaussianNbModel, GradientBoostedModel, LinearModel, Model, RandomForestModel,
    DECISION_THRESHOLD,
};
use crate::text::Lexicons;

pub const TRAIN_FRACTION: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Rf,
    Nb,
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rf" => Ok(ClassifierKind::Rf),
            "nb" => Ok(ClassifierKind::Nb),
            _ => Err(Error::InvalidInput(format!("unknown classifier {s:?} (expected rf or nb)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressorKind {
    Gb,
    Ols,
}

impl FromStr for RegressorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gb" => Ok(RegressorKind::Gb),
            "ols" => Ok(RegressorKind::Ols),
            _ => Err(Error::InvalidInput(format!("unknown regressor {s:?} (expected gb or ols)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub case: FeatureCase,
    pub mode: RankMode,
    pub seed: u64,
    pub k: usize,
    pub smote_scope: SmoteScope,
    pub smote: SmoteConfig,
    pub train_fraction: f64,
    pub classifier: ClassifierKind,
    pub regressor: RegressorKind,
    pub forest: ForestParams,
    pub boosting: BoostingParams,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            case: FeatureCase::Full,
            mode: RankMode::WithClassifier,
            seed: 0,
            k: DEFAULT_K,
            smote_scope: SmoteScope::TrainOnly,
            smote: SmoteConfig::default(),
            train_fraction: TRAIN_FRACTION,
            classifier: ClassifierKind::Rf,
            regressor: RegressorKind::Gb,
            forest: ForestParams::default(),
            boosting: BoostingParams::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train fraction {} outside (0, 1)", self.train_fraction));
        }
        if self.smote.k == 0 {
            return bad("SMOTE k must be at least 1".into());
        }
        if self.forest.n_trees == 0 {
            return bad("n_trees must be at least 1".into());
        }
        if self.forest.max_features == Some(0) {
            return bad("max_features must be at least 1".into());
        }
        if self.forest.min_samples_leaf == 0 || self.boosting.min_samples_leaf == 0 {
            return bad("min_samples_leaf must be at least 1".into());
        }
        let lr = self.boosting.learning_rate;
        if !(lr > 0.0 && lr <= 1.0) {
            return bad(format!("learning rate {lr} outside (0, 1]"));
        }
        if self.boosting.max_depth == 0 {
            return bad("boosting max_depth must be at least 1".into());
        }
        Ok(())
    }

    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            case: self.case,
            mode: self.mode,
            seed: self.seed,
        }
    }
}

/// The classifier, the regressor fitted on high-quality reviews, and the
/// regressor fitted on every review.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModels {
    pub classifier: Model,
    pub regressor: Model,
    pub regressor_all: Model,
}

impl TrainedModels {
    /// The regressor used to score reviews in `mode`.
    pub fn regressor_for(&self, mode: RankMode) -> &Model {
        match mode {
            RankMode::WithClassifier => &self.regressor,
            RankMode::WithoutClassifier => &self.regressor_all,
        }
    }

    /// Fails unless every model was trained on the features of `case`.
    pub fn check_case(&self, case: FeatureCase) -> Result<()> {
        let names = case.feature_names();
        for m in [&self.classifier, &self.regressor, &self.regressor_all] {
            m.check_feature_names(&names)?;
        }
        Ok(())
    }

    /// The feature case the models were trained on.
    pub fn case(&self) -> Result<FeatureCase> {
        let names = self.classifier.feature_names();
        let case = FeatureCase::from_feature_names(names).ok_or_else(|| Error::FeatureMismatch {
            expected: "the features of one of the four cases".into(),
            found: names.join(","),
        })?;
        self.check_case(case)?;
        Ok(case)
    }
}

/// Features, labels, split and SMOTE for every review of `corpus`.
pub fn prepare_dataset(corpus: &Corpus, config: &PipelineConfig, lexicons: &Lexicons) -> Result<LabeledDataset> {
    let features = assemble_features(corpus, config.case, lexicons)?;
    prepare_from_features(corpus, config, features)
}

pub fn prepare_from_features(
    corpus: &Corpus,
    config: &PipelineConfig,
    features: Vec<(String, FeatureVector)>,
) -> Result<LabeledDataset> {
    config.validate()?;
    let dataset = LabeledDataset::from_features(corpus, config.case, features, config.seed)?;
    let counts = dataset.class_counts(0..dataset.examples.len());
    if counts.iter().any(|&c| c < 2) {
        return Err(Error::Degenerate(format!(
            "each class needs at least 2 reviews, found {} low-quality and {} high-quality",
            counts[0], counts[1]
        )));
    }
    prepare(dataset, config.smote_scope, &config.smote, config.train_fraction)
}

pub fn fit_classifier(config: &PipelineConfig, x: &[Vec<f64>], y: &[u8]) -> Result<Model> {
    let names = config.case.feature_names();
    Ok(match config.classifier {
        ClassifierKind::Rf => Model::RandomForest(RandomForestModel::fit(x, y, names, &config.forest, config.seed)?),
        ClassifierKind::Nb => Model::NaiveBayes(GaussianNbModel::fit(x, y, names)?),
    })
}

pub fn fit_regressor(config: &PipelineConfig, x: &[Vec<f64>], y: &[f64]) -> Result<Model> {
    let names = config.case.feature_names();
    Ok(match config.regressor {
        RegressorKind::Gb => {
            Model::GradientBoosting(GradientBoostedModel::fit(x, y, names, &config.boosting, config.seed)?)
        }
        RegressorKind::Ols => Model::Linear(LinearModel::fit(x, y, names, true)?),
    })
}

/// Classifier on the (possibly oversampled) training partition; regressors
/// on real training reviews only, since synthetic examples carry no votes.
pub fn train_models(dataset: &LabeledDataset, config: &PipelineConfig) -> Result<TrainedModels> {
    config.validate()?;
    if dataset.case != config.case {
        return Err(Error::Dataset(format!(
            "dataset is case {}, configuration says {}",
            dataset.case, config.case
        )));
    }
    if dataset.split.is_none() {
        return Err(Error::Dataset("dataset has no train/test split".into()));
    }
    let (cx, cy): (Vec<Vec<f64>>, Vec<u8>) = dataset.train().map(|e| (e.features.clone(), e.label)).unzip();
    let classifier = fit_classifier(config, &cx, &cy)?;

    let real: Vec<_> = dataset.train().filter(|e| !e.synthetic).collect();
    let votes = |e: &&crate::dataset::LabeledExample| e.helpful_votes.unwrap_or(0) as f64;
    let high: Vec<_> = real.iter().filter(|e| e.label == 1).collect();
    if high.is_empty() {
        return Err(Error::Degenerate("no high-quality reviews in the training partition".into()));
    }
    let hx: Vec<Vec<f64>> = high.iter().map(|e| e.features.clone()).collect();
    let hy: Vec<f64> = high.iter().map(|e| votes(e)).collect();
    let regressor = fit_regressor(config, &hx, &hy).map_err(degenerate_if_small)?;
    let ax: Vec<Vec<f64>> = real.iter().map(|e| e.features.clone()).collect();
    let ay: Vec<f64> = real.iter().map(votes).collect();
    let regressor_all = fit_regressor(config, &ax, &ay).map_err(degenerate_if_small)?;
    Ok(TrainedModels {
        classifier,
        regressor,
        regressor_all,
    })
}

fn degenerate_if_small(e: Error) -> Error {
    match e {
        Error::Dataset(msg) => Error::Degenerate(format!("regressor training data: {msg}")),
        Error::Singular => Error::Degenerate("singular least-squares system".into()),
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quality {
    High,
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    /// 1-based.
    pub rank: usize,
    pub review_id: String,
    /// Vote prediction; `None` for low-quality reviews, which are not scored.
    pub predicted_score: Option<f64>,
    /// Absent without a classifier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<Quality>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub mode: RankMode,
    pub k: usize,
    pub entries: Vec<RankedEntry>,
    pub matching: Option<MatchingReport>,
    pub config_echo: serde_json::Value,
}

impl RankedList {
    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.review_id.as_str()).collect()
    }
}

/// Higher score first, then the newer review, then the smaller id.
fn by_score(a: (f64, NaiveDate, &str), b: (f64, NaiveDate, &str)) -> Ordering {
    b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(b.2))
}

/// Newer review first, then the smaller id.
fn by_recency(a: (NaiveDate, &str), b: (NaiveDate, &str)) -> Ordering {
    b.0.cmp(&a.0).then(a.1.cmp(b.1))
}

/// Review ids by observed votes, most first; ties go to the newer review,
/// then the smaller id.
pub fn actual_ranking(corpus: &Corpus) -> Vec<String> {
    let mut reviews: Vec<&Review> = corpus.reviews.iter().collect();
    reviews.sort_by(|a, b| {
        by_score(
            (a.helpful_votes as f64, a.date, &a.review_id),
            (b.helpful_votes as f64, b.date, &b.review_id),
        )
    });
    reviews.into_iter().map(|r| r.review_id.clone()).collect()
}

/// Ranks every review of `corpus` with frozen models. `features` must be in
/// corpus order, as produced by [`assemble_features`]. Returns the list and
/// any warnings raised along the way.
pub fn rank_with_models(
    corpus: &Corpus,
    features: &[(String, FeatureVector)],
    models: &TrainedModels,
    mode: RankMode,
    k: usize,
) -> Result<(RankedList, Vec<String>)> {
    if corpus.reviews.is_empty() {
        return Err(Error::Dataset("corpus has no reviews".into()));
    }
    if features.len() != corpus.reviews.len()
        || features.iter().zip(&corpus.reviews).any(|((id, _), r)| *id != r.review_id)
    {
        return Err(Error::Dataset("features are not aligned with the corpus reviews".into()));
    }
    let case = features[0].1.case;
    if features.iter().any(|(_, f)| f.case != case) {
        return Err(Error::Dataset("features mix several cases".into()));
    }
    models.check_case(case)?;
    let mut warnings = Vec::new();

    let quality: Vec<Option<Quality>> = match mode {
        RankMode::WithClassifier => {
            let clf = models
                .classifier
                .as_classifier()
                .ok_or_else(|| Error::UnsupportedModel("classifier file holds a regressor".into()))?;
            features
                .par_iter()
                .map(|(_, f)| {
                    let label = clf.predict(&f.values)?;
                    Ok(Some(if label == 1 { Quality::High } else { Quality::Low }))
                })
                .collect::<Result<_>>()?
        }
        RankMode::WithoutClassifier => vec![None; features.len()],
    };
    let scored: Vec<usize> = (0..features.len()).filter(|&i| quality[i] != Some(Quality::Low)).collect();
    if mode == RankMode::WithClassifier && scored.is_empty() {
        warnings.push("every review was classified low quality; the regressor was skipped".to_string());
    }
    let reg = models
        .regressor_for(mode)
        .as_regressor()
        .ok_or_else(|| Error::UnsupportedModel("regressor file holds a classifier".into()))?;
    let scores: Vec<f64> = scored
        .par_iter()
        .map(|&i| reg.predict_votes(&features[i].1.values))
        .collect::<Result<_>>()?;

    let reviews = &corpus.reviews;
    let mut head: Vec<(usize, f64)> = scored.into_iter().zip(scores).collect();
    head.sort_by(|a, b| {
        by_score(
            (a.1, reviews[a.0].date, &reviews[a.0].review_id),
            (b.1, reviews[b.0].date, &reviews[b.0].review_id),
        )
    });
    let mut tail: Vec<usize> = (0..features.len()).filter(|&i| quality[i] == Some(Quality::Low)).collect();
    tail.sort_by(|&a, &b| by_recency((reviews[a].date, &reviews[a].review_id), (reviews[b].date, &reviews[b].review_id)));

    let n_head = head.len();
    let entries: Vec<RankedEntry> = head
        .into_iter()
        .map(|(i, s)| (i, Some(s)))
        .chain(tail.into_iter().map(|i| (i, None)))
        .enumerate()
        .map(|(pos, (i, score))| RankedEntry {
            rank: pos + 1,
            review_id: reviews[i].review_id.clone(),
            predicted_score: score,
            quality: quality[i],
        })
        .collect();

    let available = match mode {
        RankMode::WithClassifier => n_head,
        RankMode::WithoutClassifier => entries.len(),
    };
    let compared = k.min(available);
    if compared < k {
        warnings.push(format!(
            "only {available} ranked reviews available; matching uses the top {compared} instead of {k}"
        ));
    }
    let predicted: Vec<&str> = entries.iter().map(|e| e.review_id.as_str()).collect();
    let actual = actual_ranking(corpus);
    let actual: Vec<&str> = actual.iter().map(String::as_str).collect();
    let matching = matching_at_k(&predicted, &actual, compared)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let list = RankedList {
        mode,
        k,
        entries,
        matching: Some(MatchingReport {
            k,
            matching,
            compared,
            short: compared < k,
        }),
        config_echo: serde_json::Value::Null,
    };
    Ok((list, warnings))
}

/// Classifier metrics on the test partition and regressor error on its real
/// reviews, for the regressor `mode` uses.
pub fn evaluate(dataset: &LabeledDataset, models: &TrainedModels, echo: ConfigEcho) -> Result<EvalReport> {
    models.check_case(dataset.case)?;
    if dataset.split.is_none() {
        return Err(Error::Dataset("dataset has no train/test split".into()));
    }
    let mut warnings = Vec::new();
    let classifier = match echo.mode {
        RankMode::WithClassifier => {
            let clf = models
                .classifier
                .as_classifier()
                .ok_or_else(|| Error::UnsupportedModel("classifier file holds a regressor".into()))?;
            let (labels, probs): (Vec<u8>, Vec<f64>) = dataset
                .test()
                .map(|e| Ok((e.label, clf.predict_proba(&e.features)?)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip();
            let report = ClassificationReport::new(&labels, &probs, DECISION_THRESHOLD)?;
            if report.auc.is_none() {
                warnings.push("test partition holds a single class; AUC undefined".to_string());
            }
            Some(report)
        }
        RankMode::WithoutClassifier => None,
    };
    let reg = models
        .regressor_for(echo.mode)
        .as_regressor()
        .ok_or_else(|| Error::UnsupportedModel("regressor file holds a classifier".into()))?;
    let mut mse_on = |high_only: bool| -> Result<Option<f64>> {
        let (actual, predicted): (Vec<f64>, Vec<f64>) = dataset
            .test()
            .filter(|e| !e.synthetic && (!high_only || e.label == 1))
            .map(|e| Ok((e.helpful_votes.unwrap_or(0) as f64, reg.predict_votes(&e.features)?)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        if actual.is_empty() {
            warnings.push(format!(
                "no real {}test reviews; MSE undefined",
                if high_only { "high-quality " } else { "" }
            ));
            return Ok(None);
        }
        evaluation::mse(&actual, &predicted).map(Some)
    };
    let mse_high_quality = mse_on(true)?;
    let mse_all = mse_on(false)?;
    Ok(EvalReport {
        config: echo,
        classifier,
        mse_high_quality,
        mse_all,
        matching: None,
        warnings,
    })
}

/// Everything one pipeline run produces.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub dataset: LabeledDataset,
    pub models: TrainedModels,
    pub ranking: RankedList,
    pub report: EvalReport,
}

pub fn run(corpus: &Corpus, config: &PipelineConfig, lexicons: &Lexicons) -> Result<PipelineRun> {
    config.validate()?;
    let features = assemble_features(corpus, config.case, lexicons)?;
    let dataset = prepare_from_features(corpus, config, features.clone())?;
    let models = train_models(&dataset, config)?;
    let mut report = evaluate(&dataset, &models, config.echo())?;
    let (mut ranking, warnings) = rank_with_models(corpus, &features, &models, config.mode, config.k)?;
    ranking.config_echo = serde_json::to_value(config)?;
    report.matching = ranking.matching;
    report.warnings.extend(warnings);
    Ok(PipelineRun {
        dataset,
        models,
        ranking,
        report,
    })
}

pub fn run_with_classifier(corpus: &Corpus, config: &PipelineConfig, lexicons: &Lexicons) -> Result<PipelineRun> {
    let config = PipelineConfig {
        mode: RankMode::WithClassifier,
        ..config.clone()
    };
    run(corpus, &config, lexicons)
}

pub fn run_without_classifier(corpus: &Corpus, config: &PipelineConfig, lexicons: &Lexicons) -> Result<PipelineRun> {
    let config = PipelineConfig {
        mode: RankMode::WithoutClassifier,
        ..config.clone()
    };
    run(corpus, &config, lexicons)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub quality: Option<Quality>,
    pub predicted_score: Option<f64>,
    /// 1-based position the review would take in `ranking`.
    pub insertion_rank: usize,
}

/// Scores a review that is not yet in `ranking` and finds where it would go,
/// using the same ordering rules as a full run. `corpus` must hold the
/// ranked reviews (their dates break score ties).
pub fn score_new_review(
    models: &TrainedModels,
    lexicons: &Lexicons,
    corpus: &Corpus,
    ranking: &RankedList,
    review: &Review,
    desc: Option<&ProductDescription>,
    qa: Option<&QACollection>,
) -> Result<Placement> {
    let case = models.case()?;
    let full = review_features(review, desc, qa, lexicons)?;
    let x = FeatureVector::from_full(&full, case).values;
    let quality = match ranking.mode {
        RankMode::WithClassifier => {
            let clf = models
                .classifier
                .as_classifier()
                .ok_or_else(|| Error::UnsupportedModel("classifier file holds a regressor".into()))?;
            Some(if clf.predict(&x)? == 1 { Quality::High } else { Quality::Low })
        }
        RankMode::WithoutClassifier => None,
    };
    let predicted_score = match quality {
        Some(Quality::Low) => None,
        _ => {
            let reg = models
                .regressor_for(ranking.mode)
                .as_regressor()
                .ok_or_else(|| Error::UnsupportedModel("regressor file holds a classifier".into()))?;
            Some(reg.predict_votes(&x)?)
        }
    };
    let me = (review.date, review.review_id.as_str());
    let mut ahead = 0;
    for e in &ranking.entries {
        let date = corpus
            .review(&e.review_id)
            .ok_or_else(|| Error::Dataset(format!("ranked review {:?} not in corpus", e.review_id)))?
            .date;
        let them = (date, e.review_id.as_str());
        let before = match (predicted_score, e.predicted_score) {
            (Some(s), Some(t)) => by_score((t, them.0, them.1), (s, me.0, me.1)) == Ordering::Less,
            // scored entries precede every unscored one
            (None, Some(_)) => true,
            (Some(_), None) => false,
            (None, None) => by_recency(them, me) == Ordering::Less,
        };
        ahead += usize::from(before);
    }
    Ok(Placement {
        quality,
        predicted_score,
        insertion_rank: ahead + 1,
    })
}
