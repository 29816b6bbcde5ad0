//! Classification, regression and ranking metrics.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureCase;
use crate::error::{Error, Result};

/// Class 1 is the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The same counts with class 0 treated as positive.
    pub fn flipped(&self) -> ConfusionMatrix {
        ConfusionMatrix {
            tp: self.tn,
            fp: self.fn_,
            fn_: self.fp,
            tn: self.tp,
        }
    }

    pub fn accuracy(&self) -> f64 {
        ratio(self.tp + self.tn, self.total())
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::InvalidInput(format!("length mismatch: {a} vs {b}")));
    }
    Ok(())
}

pub fn confusion(labels: &[u8], predictions: &[u8]) -> Result<ConfusionMatrix> {
    check_lengths(labels.len(), predictions.len())?;
    let mut m = ConfusionMatrix::default();
    for (&l, &p) in labels.iter().zip(predictions) {
        match (l != 0, p != 0) {
            (true, true) => m.tp += 1,
            (false, true) => m.fp += 1,
            (true, false) => m.fn_ += 1,
            (false, false) => m.tn += 1,
        }
    }
    Ok(m)
}

pub fn precision(m: &ConfusionMatrix) -> f64 {
    ratio(m.tp, m.tp + m.fp)
}

pub fn recall(m: &ConfusionMatrix) -> f64 {
    ratio(m.tp, m.tp + m.fn_)
}

pub fn f1(m: &ConfusionMatrix) -> f64 {
    f1_from(precision(m), recall(m))
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1_from(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Metrics for class 0 and class 1, each taken as the positive class in turn.
pub fn per_class(m: &ConfusionMatrix) -> [ClassMetrics; 2] {
    let make = |label: u8, m: &ConfusionMatrix| ClassMetrics {
        label,
        precision: precision(m),
        recall: recall(m),
        f1: f1(m),
        support: m.tp + m.fn_,
    };
    [make(0, &m.flipped()), make(1, m)]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    /// Scores `>= threshold` are predicted positive; the first point uses +inf.
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Sweeps thresholds over the distinct scores from high to low, tied
/// scores forming a single step. Starts at (0,0), ends at (1,1).
pub fn roc_curve(labels: &[u8], scores: &[f64]) -> Result<Vec<RocPoint>> {
    check_lengths(labels.len(), scores.len())?;
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l != 0).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Degenerate("ROC needs both classes among the labels".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] != 0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: s,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(points)
}

/// Trapezoidal area under a curve of (fpr, tpr) points.
pub fn auc(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum()
}

pub fn roc_auc(labels: &[u8], scores: &[f64]) -> Result<(Vec<RocPoint>, f64)> {
    let points = roc_curve(labels, scores)?;
    let area = auc(&points);
    Ok((points, area))
}

pub fn write_roc_csv<W: Write>(out: W, points: &[RocPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidInput(format!("writing ROC table: {e}"));
    w.write_record(["threshold", "fpr", "tpr"]).map_err(io)?;
    for p in points {
        let t = if p.threshold.is_infinite() {
            "inf".to_string()
        } else {
            p.threshold.to_string()
        };
        w.write_record([t, p.fpr.to_string(), p.tpr.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidInput(format!("writing ROC table: {e}")))?;
    Ok(())
}

pub fn mse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual.len(), predicted.len())?;
    if actual.is_empty() {
        return Err(Error::InvalidInput("mean squared error of nothing".into()));
    }
    let sum: f64 = actual.iter().zip(predicted).map(|(a, p)| (a - p) * (a - p)).sum();
    Ok(sum / actual.len() as f64)
}

pub const DEFAULT_K: usize = 10;

/// Size of the overlap between the two top-`k` prefixes.
pub fn matching_at_k<S: AsRef<str>>(predicted: &[S], actual: &[S], k: usize) -> Result<usize> {
    if k > predicted.len() || k > actual.len() {
        return Err(Error::InvalidInput(format!(
            "k = {k} exceeds ranking length ({} predicted, {} actual)",
            predicted.len(),
            actual.len()
        )));
    }
    let top: HashSet<&str> = predicted[..k].iter().map(AsRef::as_ref).collect();
    Ok(actual[..k].iter().filter(|id| top.contains(id.as_ref())).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankMode {
    WithClassifier,
    WithoutClassifier,
}

impl RankMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RankMode::WithClassifier => "with_classifier",
            RankMode::WithoutClassifier => "without_classifier",
        }
    }
}

impl std::str::FromStr for RankMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "with_classifier" => Ok(RankMode::WithClassifier),
            "without_classifier" => Ok(RankMode::WithoutClassifier),
            _ => Err(Error::InvalidInput(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub per_class: [ClassMetrics; 2],
    /// `None` when the evaluated labels hold a single class.
    pub auc: Option<f64>,
    /// (fpr, tpr) pairs.
    pub roc_points: Vec<(f64, f64)>,
}

impl ClassificationReport {
    pub fn new(labels: &[u8], probabilities: &[f64], threshold: f64) -> Result<Self> {
        let predictions: Vec<u8> = probabilities.iter().map(|&p| u8::from(p >= threshold)).collect();
        let m = confusion(labels, &predictions)?;
        let (roc_points, auc) = match roc_auc(labels, probabilities) {
            Ok((points, a)) => (points.iter().map(|p| (p.fpr, p.tpr)).collect(), Some(a)),
            Err(Error::Degenerate(_)) => (Vec::new(), None),
            Err(e) => return Err(e),
        };
        Ok(ClassificationReport {
            confusion: m,
            accuracy: m.accuracy(),
            per_class: per_class(&m),
            auc,
            roc_points,
        })
    }

    pub fn f1_high(&self) -> f64 {
        self.per_class[1].f1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchingReport {
    pub k: usize,
    pub matching: usize,
    /// Entries actually compared; below `k` when the ranking was short.
    pub compared: usize,
    pub short: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub case: FeatureCase,
    pub mode: RankMode,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ConfigEcho,
    pub classifier: Option<ClassificationReport>,
    /// Regressor error on the high-quality test reviews.
    pub mse_high_quality: Option<f64>,
    /// Regressor error on every test review.
    pub mse_all: Option<f64>,
    pub matching: Option<MatchingReport>,
    pub warnings: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(tp: usize, fp: usize, fn_: usize, tn: usize) -> ConfusionMatrix {
        ConfusionMatrix { tp, fp, fn_, tn }
    }

    #[test]
    fn confusion_examples() {
        assert_eq!(confusion(&[1, 1, 1], &[1, 1, 1]).unwrap(), cm(3, 0, 0, 0));
        assert_eq!(confusion(&[1, 1], &[0, 0]).unwrap(), cm(0, 0, 2, 0));
        assert_eq!(confusion(&[1, 1, 0, 0], &[1, 0, 0, 1]).unwrap(), cm(1, 1, 1, 1));
        assert!(confusion(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn ratio_metrics() {
        assert_eq!(precision(&cm(8, 2, 0, 0)), 0.8);
        assert_eq!(precision(&cm(0, 0, 3, 1)), 0.0);
        assert_eq!(f1_from(0.6, 0.6), 0.6);
        assert_eq!(f1(&cm(0, 0, 0, 5)), 0.0);
        let [c0, c1] = per_class(&cm(3, 1, 2, 4));
        assert_eq!((c0.precision, c0.recall, c0.support), (4.0 / 6.0, 0.8, 5));
        assert_eq!((c1.precision, c1.recall, c1.support), (0.75, 0.6, 5));
    }

    #[test]
    fn auc_examples() {
        let labels = [0, 0, 1, 1];
        assert_eq!(roc_auc(&labels, &[0.1, 0.2, 0.8, 0.9]).unwrap().1, 1.0);
        assert_eq!(roc_auc(&labels, &[0.9, 0.8, 0.2, 0.1]).unwrap().1, 0.0);
        let (points, a) = roc_auc(&labels, &[0.5; 4]).unwrap();
        assert_eq!(a, 0.5);
        assert_eq!(points.len(), 2);
        assert!(roc_auc(&[1, 1], &[0.1, 0.2]).is_err());
    }

    #[test]
    fn roc_csv_format() {
        let (points, _) = roc_auc(&[0, 1], &[0.25, 0.75]).unwrap();
        let mut out = Vec::new();
        write_roc_csv(&mut out, &points).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "threshold,fpr,tpr\ninf,0,0\n0.75,0,1\n0.25,1,1\n"
        );
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[2.0, 4.0], &[1.0, 2.0]).unwrap(), 2.5);
        assert_eq!(mse(&[1.0, 5.0], &[1.0, 5.0]).unwrap(), 0.0);
        assert!(mse(&[], &[]).is_err());
        assert!(mse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn matching_examples() {
        assert_eq!(matching_at_k(&["a", "b", "c"], &["c", "d", "b"], 3).unwrap(), 2);
        let ids: Vec<String> = (0..10).map(|i| i.to_string()).collect();
        let other: Vec<String> = (10..20).map(|i| i.to_string()).collect();
        assert_eq!(matching_at_k(&ids, &ids, 10).unwrap(), 10);
        assert_eq!(matching_at_k(&ids, &other, 10).unwrap(), 0);
        assert!(matching_at_k(&ids, &ids, 11).is_err());
    }

    #[test]
    fn report_with_single_class_has_no_auc() {
        let r = ClassificationReport::new(&[1, 1, 1], &[0.2, 0.7, 0.9], 0.5).unwrap();
        assert_eq!(r.auc, None);
        assert_eq!(r.confusion, cm(2, 0, 1, 0));
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        fn pair_statistic(labels: &[u8], scores: &[f64]) -> f64 {
            let mut good = 0.0;
            let mut pairs = 0.0;
            for (i, &li) in labels.iter().enumerate() {
                for (j, &lj) in labels.iter().enumerate() {
                    if li == 1 && lj == 0 {
                        pairs += 1.0;
                        if scores[i] > scores[j] {
                            good += 1.0;
                        } else if scores[i] == scores[j] {
                            good += 0.5;
                        }
                    }
                }
            }
            good / pairs
        }

        fn scored() -> impl Strategy<Value = (Vec<u8>, Vec<f64>)> {
            prop::collection::vec((0u8..2, 1u32..30), 2..200)
                .prop_filter("both classes", |v| v.iter().any(|p| p.0 == 0) && v.iter().any(|p| p.0 == 1))
                .prop_map(|v| (v.iter().map(|p| p.0).collect(), v.iter().map(|p| p.1 as f64 / 7.0).collect()))
        }

        proptest! {
            #[test]
            fn auc_matches_pair_statistic((labels, scores) in scored()) {
                let (points, a) = roc_auc(&labels, &scores).unwrap();
                prop_assert!((a - pair_statistic(&labels, &scores)).abs() < 1e-9);
                prop_assert!((0.0..=1.0).contains(&a));
                let last = points.last().unwrap();
                prop_assert_eq!((points[0].fpr, points[0].tpr, last.fpr, last.tpr), (0.0, 0.0, 1.0, 1.0));
                for w in points.windows(2) {
                    prop_assert!(w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr);
                }
            }

            #[test]
            fn auc_invariant_under_monotone_maps((labels, scores) in scored()) {
                let a = roc_auc(&labels, &scores).unwrap().1;
                let affine: Vec<f64> = scores.iter().map(|s| 2.0 * s + 7.0).collect();
                let cubed: Vec<f64> = scores.iter().map(|s| s * s * s).collect();
                prop_assert_eq!(a, roc_auc(&labels, &affine).unwrap().1);
                prop_assert_eq!(a, roc_auc(&labels, &cubed).unwrap().1);
            }

            #[test]
            fn metric_bounds(tp in 0usize..50, fp in 0usize..50, fn_ in 0usize..50, tn in 0usize..50) {
                let m = cm(tp, fp, fn_, tn);
                let (p, r, f) = (precision(&m), recall(&m), f1(&m));
                for v in [p, r, f] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
                prop_assert!(f <= 2.0 * p.min(r) + 1e-15);
                if p + r > 0.0 {
                    prop_assert_eq!(f, 2.0 * p * r / (p + r));
                }
            }

            #[test]
            fn matching_symmetric_and_order_free(perm in Just((0..30).collect::<Vec<u32>>()).prop_shuffle(),
                                                 perm2 in Just((0..30).collect::<Vec<u32>>()).prop_shuffle(),
                                                 k in 0usize..=30) {
                let a: Vec<String> = perm.iter().map(u32::to_string).collect();
                let b: Vec<String> = perm2.iter().map(u32::to_string).collect();
                let m = matching_at_k(&a, &b, k).unwrap();
                prop_assert!(m <= k);
                prop_assert_eq!(m, matching_at_k(&b, &a, k).unwrap());
                let mut a2 = a.clone();
                a2[..k].reverse();
                prop_assert_eq!(m, matching_at_k(&a2, &b, k).unwrap());
            }
        }
    }
}
