//! Feature assembly, per-product labelling, stratified splitting and SMOTE
//! rebalancing.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, ProductDescription, QACollection, Review};
use crate::error::{Error, Result};
use crate::similarity::{desc_sim, qa_sim};
use crate::text::{extract_text_features, Lexicons};

/// All seventeen features in their fixed order.
pub const FEATURE_NAMES: [&str; 17] = [
    "noun",
    "adjective",
    "verb",
    "flesch_reading_ease",
    "dale_chall_re",
    "difficult_words",
    "length",
    "set_length",
    "wrong_words",
    "one_letter_words",
    "two_letter_words",
    "longer_letter_words",
    "lex_diversity",
    "entropy",
    "rating",
    "desc_sim",
    "qa_sim",
];

const DESC_SIM: usize = 15;
const QA_SIM: usize = 16;

/// Which of the two similarity features join the fifteen text features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum FeatureCase {
    /// Text features only.
    TextOnly = 1,
    /// Plus `desc_sim`.
    WithDescription = 2,
    /// Plus `qa_sim`.
    WithQuestions = 3,
    /// Plus both.
    Full = 4,
}

impl FeatureCase {
    pub const ALL: [FeatureCase; 4] = [
        FeatureCase::TextOnly,
        FeatureCase::WithDescription,
        FeatureCase::WithQuestions,
        FeatureCase::Full,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    fn includes(self, index: usize) -> bool {
        match index {
            DESC_SIM => matches!(self, FeatureCase::WithDescription | FeatureCase::Full),
            QA_SIM => matches!(self, FeatureCase::WithQuestions | FeatureCase::Full),
            _ => true,
        }
    }

    pub fn dimension(self) -> usize {
        (0..FEATURE_NAMES.len()).filter(|&i| self.includes(i)).count()
    }

    pub fn feature_names(self) -> Vec<String> {
        FEATURE_NAMES
            .iter()
            .enumerate()
            .filter(|(i, _)| self.includes(*i))
            .map(|(_, n)| n.to_string())
            .collect()
    }

    /// The case whose feature list equals `names` exactly.
    pub fn from_feature_names<S: AsRef<str>>(names: &[S]) -> Option<FeatureCase> {
        Self::ALL.into_iter().find(|c| {
            let expected = c.feature_names();
            expected.len() == names.len() && expected.iter().zip(names).all(|(a, b)| a == b.as_ref())
        })
    }
}

impl TryFrom<u8> for FeatureCase {
    type Error = String;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        match n {
            1 => Ok(FeatureCase::TextOnly),
            2 => Ok(FeatureCase::WithDescription),
            3 => Ok(FeatureCase::WithQuestions),
            4 => Ok(FeatureCase::Full),
            _ => Err(format!("unknown feature case {n} (expected 1-4)")),
        }
    }
}

impl From<FeatureCase> for u8 {
    fn from(c: FeatureCase) -> u8 {
        c.number()
    }
}

impl fmt::Display for FeatureCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub case: FeatureCase,
    pub values: Vec<f64>,
}

impl FeatureVector {
    /// Drops the similarity features that `case` excludes from a full
    /// seventeen-value vector.
    pub fn from_full(full: &[f64], case: FeatureCase) -> FeatureVector {
        debug_assert_eq!(full.len(), FEATURE_NAMES.len());
        FeatureVector {
            case,
            values: full
                .iter()
                .enumerate()
                .filter(|(i, _)| case.includes(*i))
                .map(|(_, v)| *v)
                .collect(),
        }
    }
}

/// The seventeen features of one review.
pub fn review_features(
    review: &Review,
    desc: Option<&ProductDescription>,
    qa: Option<&QACollection>,
    lexicons: &Lexicons,
) -> Result<Vec<f64>> {
    let mut v = extract_text_features(review, lexicons)?.to_vec();
    v.push(desc.map_or(0.0, |d| desc_sim(review, d)));
    v.push(qa.map_or(0.0, |q| qa_sim(review, q)));
    Ok(v)
}

/// Feature vectors for every review, in corpus (review_id) order.
pub fn assemble_features(
    corpus: &Corpus,
    case: FeatureCase,
    lexicons: &Lexicons,
) -> Result<Vec<(String, FeatureVector)>> {
    corpus
        .reviews
        .par_iter()
        .map(|r| {
            let full = review_features(
                r,
                corpus.description(&r.product_id),
                corpus.questions(&r.product_id),
                lexicons,
            )?;
            Ok((r.review_id.clone(), FeatureVector::from_full(&full, case)))
        })
        .collect()
}

/// Mean helpful votes per product.
pub fn product_thresholds(corpus: &Corpus) -> Result<BTreeMap<String, f64>> {
    let mut sums: BTreeMap<&str, (u128, u64)> = BTreeMap::new();
    for r in &corpus.reviews {
        let e = sums.entry(r.product_id.as_str()).or_insert((0, 0));
        e.0 += r.helpful_votes as u128;
        e.1 += 1;
    }
    sums.into_iter()
        .map(|(p, (sum, n))| {
            if n == 0 {
                return Err(Error::Dataset(format!("product {p:?} has no reviews")));
            }
            Ok((p.to_string(), sum as f64 / n as f64))
        })
        .collect()
}

/// 1 when a review's votes strictly exceed its product threshold, else 0.
/// Aligned with `corpus.reviews`.
pub fn label_reviews(corpus: &Corpus, thresholds: &BTreeMap<String, f64>) -> Result<Vec<u8>> {
    corpus
        .reviews
        .iter()
        .map(|r| {
            let t = thresholds.get(&r.product_id).ok_or_else(|| {
                Error::Dataset(format!("no threshold for product {:?}", r.product_id))
            })?;
            Ok(u8::from(r.helpful_votes as f64 > *t))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    /// Corpus review id, or `synthetic-NNNNNN`.
    pub id: String,
    pub features: Vec<f64>,
    pub label: u8,
    /// `None` for synthetic examples.
    pub helpful_votes: Option<u64>,
    pub synthetic: bool,
}

/// Index partition of `LabeledDataset::examples`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub case: FeatureCase,
    pub examples: Vec<LabeledExample>,
    pub thresholds: BTreeMap<String, f64>,
    pub split: Option<Split>,
    pub seed: u64,
}

impl LabeledDataset {
    /// Features and labels for every review of `corpus`.
    pub fn from_corpus(
        corpus: &Corpus,
        case: FeatureCase,
        lexicons: &Lexicons,
        seed: u64,
    ) -> Result<LabeledDataset> {
        let features = assemble_features(corpus, case, lexicons)?;
        Self::from_features(corpus, case, features, seed)
    }

    /// Same as [`from_corpus`](Self::from_corpus) with precomputed features.
    pub fn from_features(
        corpus: &Corpus,
        case: FeatureCase,
        features: Vec<(String, FeatureVector)>,
        seed: u64,
    ) -> Result<LabeledDataset> {
        let thresholds = product_thresholds(corpus)?;
        let labels = label_reviews(corpus, &thresholds)?;
        let by_id: BTreeMap<&str, (usize, u8)> = corpus
            .reviews
            .iter()
            .zip(&labels)
            .enumerate()
            .map(|(i, (r, &l))| (r.review_id.as_str(), (i, l)))
            .collect();
        let examples = features
            .into_iter()
            .map(|(id, fv)| {
                if fv.case != case {
                    return Err(Error::Dataset(format!(
                        "feature vector for {id:?} is case {}, expected {case}",
                        fv.case
                    )));
                }
                let &(i, label) = by_id
                    .get(id.as_str())
                    .ok_or_else(|| Error::Dataset(format!("review {id:?} not in corpus")))?;
                Ok(LabeledExample {
                    id,
                    features: fv.values,
                    label,
                    helpful_votes: Some(corpus.reviews[i].helpful_votes),
                    synthetic: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LabeledDataset {
            case,
            examples,
            thresholds,
            split: None,
            seed,
        })
    }

    pub fn class_counts(&self, indices: impl IntoIterator<Item = usize>) -> [usize; 2] {
        let mut c = [0, 0];
        for i in indices {
            c[self.examples[i].label as usize] += 1;
        }
        c
    }

    pub fn train(&self) -> impl Iterator<Item = &LabeledExample> {
        self.split.iter().flat_map(|s| s.train.iter()).map(|&i| &self.examples[i])
    }

    pub fn test(&self) -> impl Iterator<Item = &LabeledExample> {
        self.split.iter().flat_map(|s| s.test.iter()).map(|&i| &self.examples[i])
    }

    /// Splits every example (see [`train_test_split`]).
    pub fn split_with(&mut self, train_fraction: f64) -> Result<()> {
        let labels: Vec<u8> = self.examples.iter().map(|e| e.label).collect();
        let mut rng = stream_rng(self.seed, RngStream::Split);
        self.split = Some(train_test_split(&labels, train_fraction, &mut rng)?);
        Ok(())
    }
}

/// Independent random streams derived from the single run seed. Forest
/// trees use `seed + tree_index` instead (see `learners::forest`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngStream {
    Split = 1,
    Smote = 2,
}

pub fn stream_rng(seed: u64, stream: RngStream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Stratified shuffle split.
///
/// The training side gets `floor(train_fraction · n)` examples, shared between
/// the classes by largest remainder (ties go to the lower label). Each class
/// is shuffled independently. Indices in the result are sorted.
pub fn train_test_split<R: Rng>(labels: &[u8], train_fraction: f64, rng: &mut R) -> Result<Split> {
    if labels.len() < 4 {
        return Err(Error::Dataset(format!(
            "need at least 4 examples to split, got {}",
            labels.len()
        )));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Dataset(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        if l > 1 {
            return Err(Error::Dataset(format!("label {l} is not binary")));
        }
        by_class[l as usize].push(i);
    }
    let n_train = (train_fraction * labels.len() as f64).floor() as usize;
    let exact: Vec<f64> = by_class.iter().map(|c| train_fraction * c.len() as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    let mut leftover = n_train - quota.iter().sum::<usize>();
    for &c in order.iter().cycle().take(4) {
        if leftover == 0 {
            break;
        }
        if quota[c] < by_class[c].len() {
            quota[c] += 1;
            leftover -= 1;
        }
    }

    let mut split = Split {
        train: Vec::with_capacity(n_train),
        test: Vec::with_capacity(labels.len() - n_train),
    };
    for (class, members) in by_class.iter_mut().enumerate() {
        if !members.is_empty() && quota[class] == 0 {
            return Err(Error::Dataset(format!(
                "class {class} has {} example(s) and none would be trained on",
                members.len()
            )));
        }
        members.shuffle(rng);
        split.train.extend_from_slice(&members[..quota[class]]);
        split.test.extend_from_slice(&members[quota[class]..]);
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoteScope {
    /// Oversample the training partition only.
    TrainOnly,
    /// Oversample everything, then split.
    PreSplit,
}

impl std::str::FromStr for SmoteScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "train_only" => Ok(SmoteScope::TrainOnly),
            "pre_split" => Ok(SmoteScope::PreSplit),
            other => Err(format!("unknown SMOTE scope {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoteConfig {
    pub k: usize,
    /// Min-max scale features for the neighbour search only.
    pub normalize_for_knn: bool,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        SmoteConfig {
            k: 5,
            normalize_for_knn: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPoint {
    pub values: Vec<f64>,
    /// Index of the minority point being interpolated from.
    pub base: usize,
    /// Index of the chosen neighbour.
    pub neighbor: usize,
    pub gap: f64,
}

/// `x + gap·(z − x)`, per coordinate.
pub fn interpolate(x: &[f64], z: &[f64], gap: f64) -> Vec<f64> {
    x.iter()
        .zip(z)
        .map(|(&a, &b)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            // clamp absorbs rounding at gap ≈ 1
            (a + gap * (b - a)).clamp(lo, hi)
        })
        .collect()
}

fn nearest_neighbors(points: &[Vec<f64>], k: usize, normalize: bool) -> Vec<Vec<usize>> {
    let dim = points[0].len();
    let scaled: Vec<Vec<f64>> = if normalize {
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for p in points {
            for (j, &v) in p.iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        points
            .iter()
            .map(|p| {
                p.iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        let range = hi[j] - lo[j];
                        if range > 0.0 {
                            (v - lo[j]) / range
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect()
    } else {
        points.to_vec()
    };
    scaled
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut d: Vec<(f64, usize)> = scaled
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, q)| (p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), j))
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.truncate(k);
            d.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

/// Generates exactly `target_n` SMOTE points from `minority`.
///
/// Base points are visited round-robin in a shuffled order; each is paired
/// with one of its `k` nearest minority neighbours (Euclidean) chosen
/// uniformly, and a gap is drawn from U[0, 1).
pub fn smote_oversample<R: Rng>(
    minority: &[Vec<f64>],
    k: usize,
    target_n: usize,
    normalize_for_knn: bool,
    rng: &mut R,
) -> Result<Vec<SyntheticPoint>> {
    if minority.len() < 2 {
        return Err(Error::Degenerate(format!(
            "SMOTE needs at least 2 minority examples, got {}",
            minority.len()
        )));
    }
    if k == 0 || k > minority.len() - 1 {
        return Err(Error::Dataset(format!(
            "SMOTE k = {k} outside 1..={}",
            minority.len() - 1
        )));
    }
    if target_n == 0 {
        return Ok(Vec::new());
    }
    let neighbors = nearest_neighbors(minority, k, normalize_for_knn);
    let mut order: Vec<usize> = (0..minority.len()).collect();
    order.shuffle(rng);
    let out = (0..target_n)
        .map(|i| {
            let base = order[i % order.len()];
            let neighbor = neighbors[base][rng.gen_range(0..neighbors[base].len())];
            let gap: f64 = rng.gen();
            SyntheticPoint {
                values: interpolate(&minority[base], &minority[neighbor], gap),
                base,
                neighbor,
                gap,
            }
        })
        .collect();
    Ok(out)
}

/// Oversamples the minority class until both classes have equal counts.
///
/// `TrainOnly` requires an existing split and adds the synthetic examples to
/// its training side; `PreSplit` requires no split yet. `k` is reduced to
/// `minority − 1` for very small minorities.
pub fn balance(mut dataset: LabeledDataset, scope: SmoteScope, config: &SmoteConfig) -> Result<LabeledDataset> {
    let pool: Vec<usize> = match (scope, &dataset.split) {
        (SmoteScope::TrainOnly, Some(split)) => split.train.clone(),
        (SmoteScope::TrainOnly, None) => {
            return Err(Error::Dataset("train-only balancing needs a split first".into()))
        }
        (SmoteScope::PreSplit, None) => (0..dataset.examples.len()).collect(),
        (SmoteScope::PreSplit, Some(_)) => {
            return Err(Error::Dataset("pre-split balancing on an already split dataset".into()))
        }
    };
    let counts = dataset.class_counts(pool.iter().copied());
    if counts[0] == 0 || counts[1] == 0 {
        return Err(Error::Degenerate(format!(
            "cannot balance: class counts {counts:?}"
        )));
    }
    let minority_label: u8 = if counts[1] < counts[0] { 1 } else { 0 };
    let deficit = counts[1 - minority_label as usize] - counts[minority_label as usize];
    if deficit == 0 {
        return Ok(dataset);
    }
    let minority: Vec<Vec<f64>> = pool
        .iter()
        .filter(|&&i| dataset.examples[i].label == minority_label)
        .map(|&i| dataset.examples[i].features.clone())
        .collect();
    let k = config.k.min(minority.len().saturating_sub(1)).max(1);
    let mut rng = stream_rng(dataset.seed, RngStream::Smote);
    let synthetic = smote_oversample(&minority, k, deficit, config.normalize_for_knn, &mut rng)?;
    let first = dataset.examples.len();
    dataset
        .examples
        .extend(synthetic.into_iter().enumerate().map(|(n, p)| LabeledExample {
            id: format!("synthetic-{n:06}"),
            features: p.values,
            label: minority_label,
            helpful_votes: None,
            synthetic: true,
        }));
    if let Some(split) = dataset.split.as_mut() {
        split.train.extend(first..dataset.examples.len());
    }
    Ok(dataset)
}

/// Runs labelling output through the configured SMOTE scope and split.
pub fn prepare(
    dataset: LabeledDataset,
    scope: SmoteScope,
    smote: &SmoteConfig,
    train_fraction: f64,
) -> Result<LabeledDataset> {
    match scope {
        SmoteScope::PreSplit => {
            let mut balanced = balance(dataset, scope, smote)?;
            balanced.split_with(train_fraction)?;
            Ok(balanced)
        }
        SmoteScope::TrainOnly => {
            let mut d = dataset;
            d.split_with(train_fraction)?;
            balance(d, scope, smote)
        }
    }
}

/// One row of a features file. `label` and `synthetic` are absent in the
/// unlabeled form written by featurization.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub review_id: String,
    pub values: Vec<f64>,
    pub label: Option<u8>,
    pub helpful_votes: Option<u64>,
    pub synthetic: Option<bool>,
}

impl From<&LabeledExample> for FeatureRow {
    fn from(e: &LabeledExample) -> Self {
        FeatureRow {
            review_id: e.id.clone(),
            values: e.features.clone(),
            label: Some(e.label),
            helpful_votes: e.helpful_votes,
            synthetic: Some(e.synthetic),
        }
    }
}

/// Writes `review_id, <features>, [label,] helpful_votes[, synthetic]`.
pub fn write_features_csv<W: Write>(out: W, case: FeatureCase, rows: &[FeatureRow], labeled: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["review_id".to_string()];
    header.extend(case.feature_names());
    if labeled {
        header.push("label".into());
    }
    header.push("helpful_votes".into());
    if labeled {
        header.push("synthetic".into());
    }
    let csv_err = |e: csv::Error| Error::InvalidInput(format!("writing features: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        if row.values.len() != case.dimension() {
            return Err(Error::DimensionMismatch {
                expected: case.dimension(),
                found: row.values.len(),
            });
        }
        let mut rec = vec![row.review_id.clone()];
        rec.extend(row.values.iter().map(|v| v.to_string()));
        if labeled {
            rec.push(row.label.map(|l| l.to_string()).unwrap_or_default());
        }
        rec.push(row.helpful_votes.map(|v| v.to_string()).unwrap_or_default());
        if labeled {
            rec.push(row.synthetic.map(|s| s.to_string()).unwrap_or_default());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("writing features: {e}")))?;
    Ok(())
}

/// Reads either form of the features file and infers the case from the header.
pub fn read_features_csv<R: Read>(input: R, origin: &Path) -> Result<(FeatureCase, Vec<FeatureRow>)> {
    let mut rdr = csv::Reader::from_reader(input);
    let csv_err = |source| Error::Csv {
        path: origin.to_path_buf(),
        source,
    };
    let header = rdr.headers().map_err(csv_err)?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names.first() != Some(&"review_id") {
        return Err(Error::InvalidInput(format!(
            "{}: first column must be review_id",
            origin.display()
        )));
    }
    let n_features = names[1..]
        .iter()
        .take_while(|n| FEATURE_NAMES.contains(n))
        .count();
    let case = FeatureCase::from_feature_names(&names[1..1 + n_features]).ok_or_else(|| {
        Error::InvalidInput(format!(
            "{}: feature columns do not match any case",
            origin.display()
        ))
    })?;
    let rest = &names[1 + n_features..];
    let labeled = match rest {
        ["helpful_votes"] => false,
        ["label", "helpful_votes", "synthetic"] => true,
        _ => {
            return Err(Error::InvalidInput(format!(
                "{}: unexpected trailing columns {rest:?}",
                origin.display()
            )))
        }
    };
    let bad = |line: u64, what: &str| {
        Error::InvalidInput(format!("{}: line {line}: bad {what}", origin.display()))
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        let values = (1..=n_features)
            .map(|i| rec[i].parse::<f64>().map_err(|_| bad(line, names[i])))
            .collect::<Result<Vec<_>>>()?;
        let field = |name: &str| rec.get(names.iter().position(|n| *n == name).unwrap()).unwrap_or("");
        let votes = field("helpful_votes");
        let helpful_votes = if votes.is_empty() {
            None
        } else {
            Some(votes.parse().map_err(|_| bad(line, "helpful_votes"))?)
        };
        let (label, synthetic) = if labeled {
            (
                Some(field("label").parse().map_err(|_| bad(line, "label"))?),
                Some(field("synthetic").parse().map_err(|_| bad(line, "synthetic"))?),
            )
        } else {
            (None, None)
        };
        rows.push(FeatureRow {
            review_id: rec[0].to_string(),
            values,
            label,
            helpful_votes,
            synthetic,
        });
    }
    Ok((case, rows))
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;

    use super::*;
    use crate::corpus::build_corpus;

    fn corpus_with_votes(votes: &[(&str, u64)]) -> Corpus {
        let reviews = votes
            .iter()
            .enumerate()
            .map(|(i, &(p, v))| Review {
                review_id: format!("r{i:02}"),
                product_id: p.into(),
                date: NaiveDate::from_ymd_opt(2017, 1, 1 + i as u32).unwrap(),
                heading: String::new(),
                rating: 4,
                text: "Works fine. Good battery!".into(),
                helpful_votes: v,
            })
            .collect();
        build_corpus(reviews, vec![], vec![]).unwrap()
    }

    #[test]
    fn case_dimensions() {
        assert_eq!(FeatureCase::TextOnly.dimension(), 15);
        assert_eq!(FeatureCase::WithDescription.dimension(), 16);
        assert_eq!(FeatureCase::WithQuestions.dimension(), 16);
        assert_eq!(FeatureCase::Full.dimension(), 17);
        assert!(FeatureCase::WithDescription.feature_names().contains(&"desc_sim".to_string()));
        assert!(!FeatureCase::WithDescription.feature_names().contains(&"qa_sim".to_string()));
        for c in FeatureCase::ALL {
            assert_eq!(FeatureCase::from_feature_names(&c.feature_names()), Some(c));
        }
        assert!(FeatureCase::try_from(5).is_err());
    }

    #[test]
    fn case_masks_drop_similarity_columns() {
        let full: Vec<f64> = (0..17).map(f64::from).collect();
        let c2 = FeatureVector::from_full(&full, FeatureCase::WithDescription);
        let mut expected = full.clone();
        expected.remove(16);
        assert_eq!(c2.values, expected);
        let c3 = FeatureVector::from_full(&full, FeatureCase::WithQuestions);
        assert_eq!(c3.values[15], 16.0);
        assert_eq!(FeatureVector::from_full(&full, FeatureCase::TextOnly).values, full[..15]);
    }

    #[test]
    fn thresholds_and_labels() {
        let c = corpus_with_votes(&[("p", 0), ("p", 0), ("p", 1), ("p", 5), ("p", 10), ("q", 0), ("q", 0), ("s", 4)]);
        let t = product_thresholds(&c).unwrap();
        assert!((t["p"] - 3.2).abs() < 1e-12);
        assert_eq!(t["q"], 0.0);
        assert_eq!(t["s"], 4.0);
        let labels = label_reviews(&c, &t).unwrap();
        assert_eq!(labels, vec![0, 0, 0, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn split_sizes() {
        let labels: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = train_test_split(&labels, 0.75, &mut rng).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (75, 25));
        let ones = s.train.iter().filter(|&&i| labels[i] == 1).count();
        assert!(ones == 37 || ones == 38);

        let s = train_test_split(&[0, 1, 0, 1], 0.75, &mut rng).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (3, 1));
        assert!(train_test_split(&[0, 1, 0], 0.75, &mut rng).is_err());
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i % 3 == 0)).collect();
        let run = |seed| train_test_split(&labels, 0.75, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(run(1), run(1));
        let distinct = (0..100u64).filter(|&s| run(s) != run(s + 1000)).count();
        assert!(distinct >= 99);
    }

    #[test]
    fn split_needs_training_examples_per_class() {
        // a lone positive still lands in training
        let s = train_test_split(&[0, 0, 0, 1], 0.75, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(s.train.contains(&3));
    }

    #[test]
    fn smote_midpoint() {
        assert_eq!(interpolate(&[0.0, 0.0], &[2.0, 2.0], 0.5), vec![1.0, 1.0]);
        let minority = vec![vec![0.0, 0.0], vec![2.0, 2.0]];
        let pts = smote_oversample(&minority, 1, 4, true, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(pts.len(), 4);
        for p in pts {
            assert_eq!(p.neighbor, 1 - p.base);
            assert_eq!(p.values[0], p.values[1]);
        }
    }

    #[test]
    fn smote_rejects_bad_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let one = vec![vec![1.0]];
        assert!(smote_oversample(&one, 1, 3, true, &mut rng).is_err());
        let two = vec![vec![1.0], vec![2.0]];
        assert!(smote_oversample(&two, 2, 3, true, &mut rng).is_err());
        assert!(smote_oversample(&two, 0, 3, true, &mut rng).is_err());
        assert!(smote_oversample(&two, 1, 0, true, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn smote_uses_nearest_neighbors() {
        let minority = vec![vec![0.0], vec![1.0], vec![100.0], vec![101.0]];
        let pts = smote_oversample(&minority, 1, 40, false, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        for p in &pts {
            assert_eq!(p.neighbor, p.base ^ 1);
        }
        // round robin visits every base equally
        for b in 0..4 {
            assert_eq!(pts.iter().filter(|p| p.base == b).count(), 10);
        }
    }

    fn toy_dataset(pos: usize, neg: usize) -> LabeledDataset {
        let examples = (0..pos + neg)
            .map(|i| LabeledExample {
                id: format!("r{i:03}"),
                features: vec![i as f64, (i * i) as f64 % 7.0],
                label: u8::from(i < pos),
                helpful_votes: Some(i as u64),
                synthetic: false,
            })
            .collect();
        LabeledDataset {
            case: FeatureCase::TextOnly,
            examples,
            thresholds: BTreeMap::new(),
            split: None,
            seed: 11,
        }
    }

    #[test]
    fn balance_pre_split_equalizes() {
        let d = balance(toy_dataset(6, 30), SmoteScope::PreSplit, &SmoteConfig::default()).unwrap();
        assert_eq!(d.class_counts(0..d.examples.len()), [30, 30]);
        assert_eq!(d.examples.iter().filter(|e| e.synthetic).count(), 24);
        assert!(d.examples.iter().filter(|e| e.synthetic).all(|e| e.label == 1 && e.helpful_votes.is_none()));
    }

    #[test]
    fn balance_leaves_balanced_input() {
        let d0 = toy_dataset(10, 10);
        let d = balance(d0.clone(), SmoteScope::PreSplit, &SmoteConfig::default()).unwrap();
        assert_eq!(d, d0);
    }

    #[test]
    fn train_only_keeps_test_real() {
        let d = prepare(toy_dataset(12, 60), SmoteScope::TrainOnly, &SmoteConfig::default(), 0.75).unwrap();
        assert!(d.test().all(|e| !e.synthetic));
        let split = d.split.as_ref().unwrap();
        let c = d.class_counts(split.train.iter().copied());
        assert_eq!(c[0], c[1]);
        let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), d.examples.len());
    }

    #[test]
    fn balance_with_single_minority_fails() {
        assert!(matches!(
            balance(toy_dataset(1, 10), SmoteScope::PreSplit, &SmoteConfig::default()),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn features_csv_round_trip() {
        let d = toy_dataset(2, 2);
        let rows: Vec<FeatureRow> = d
            .examples
            .iter()
            .map(|e| FeatureRow {
                values: (0..15).map(|j| e.features[0] * 0.1 + j as f64).collect(),
                ..FeatureRow::from(e)
            })
            .collect();
        for labeled in [false, true] {
            let mut buf = Vec::new();
            write_features_csv(&mut buf, FeatureCase::TextOnly, &rows, labeled).unwrap();
            let (case, back) = read_features_csv(&buf[..], Path::new("f.csv")).unwrap();
            assert_eq!(case, FeatureCase::TextOnly);
            for (a, b) in rows.iter().zip(&back) {
                assert_eq!(a.values, b.values);
                assert_eq!(a.helpful_votes, b.helpful_votes);
                assert_eq!(b.label.is_some(), labeled);
            }
        }
    }

    #[test]
    fn dataset_from_corpus_labels_reviews() {
        let c = corpus_with_votes(&[("p", 0), ("p", 9), ("p", 1), ("p", 2)]);
        let d = LabeledDataset::from_corpus(&c, FeatureCase::Full, &Lexicons::bundled(), 1).unwrap();
        assert_eq!(d.examples.len(), 4);
        assert_eq!(d.examples.iter().map(|e| e.label).collect::<Vec<_>>(), vec![0, 1, 0, 0]);
        assert!(d.examples.iter().all(|e| e.features.len() == 17));
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        proptest! {
            #[test]
            fn labels_invariant_under_vote_shift(votes in prop::collection::vec(0u64..50, 2..12), shift in 1u64..100) {
                let base: Vec<(&str, u64)> = votes.iter().map(|&v| ("p", v)).collect();
                let shifted: Vec<(&str, u64)> = votes.iter().map(|&v| ("p", v + shift)).collect();
                let (a, b) = (corpus_with_votes(&base), corpus_with_votes(&shifted));
                let (ta, tb) = (product_thresholds(&a).unwrap(), product_thresholds(&b).unwrap());
                prop_assert!((tb["p"] - ta["p"] - shift as f64).abs() < 1e-9);
                prop_assert_eq!(label_reviews(&a, &ta).unwrap(), label_reviews(&b, &tb).unwrap());
            }
        }
    }
}
