//! Versioned JSON model files.
//!
//! ```json
//! {"format_version":1,"model_type":"rf","feature_names":[...],
//!  "hyperparams":{...},"payload":{...}}
//! ```
//!
//! Trees are stored as parallel node arrays; `-1` marks a missing child or
//! feature (leaves).

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::bayes::{GaussianNbModel, VAR_SMOOTHING};
use super::boosting::{BoostingParams, GradientBoostedModel};
use super::forest::{ForestParams, RandomForestModel};
use super::linear::{LinearModel, RIDGE_FALLBACK};
use super::tree::{DecisionTree, LeafValue, TreeNode};
use super::{Classifier, Regressor};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelType {
    RandomForest,
    GradientBoosting,
    NaiveBayes,
    Linear,
}

impl ModelType {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelType::RandomForest => "rf",
            ModelType::GradientBoosting => "gb",
            ModelType::NaiveBayes => "nb",
            ModelType::Linear => "ols",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "rf" => ModelType::RandomForest,
            "gb" => ModelType::GradientBoosting,
            "nb" => ModelType::NaiveBayes,
            "ols" => ModelType::Linear,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    RandomForest(RandomForestModel),
    GradientBoosting(GradientBoostedModel),
    NaiveBayes(GaussianNbModel),
    Linear(LinearModel),
}

impl Model {
    pub fn model_type(&self) -> ModelType {
        match self {
            Model::RandomForest(_) => ModelType::RandomForest,
            Model::GradientBoosting(_) => ModelType::GradientBoosting,
            Model::NaiveBayes(_) => ModelType::NaiveBayes,
            Model::Linear(_) => ModelType::Linear,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            Model::RandomForest(m) => &m.feature_names,
            Model::GradientBoosting(m) => &m.feature_names,
            Model::NaiveBayes(m) => &m.feature_names,
            Model::Linear(m) => &m.feature_names,
        }
    }

    pub fn as_classifier(&self) -> Option<&dyn Classifier> {
        match self {
            Model::RandomForest(m) => Some(m),
            Model::NaiveBayes(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_regressor(&self) -> Option<&dyn Regressor> {
        match self {
            Model::GradientBoosting(m) => Some(m),
            Model::Linear(m) => Some(m),
            _ => None,
        }
    }

    /// Fails unless `names` equals the training feature names, in order.
    pub fn check_feature_names<S: AsRef<str>>(&self, names: &[S]) -> Result<()> {
        let own = self.feature_names();
        if own.len() != names.len() || own.iter().zip(names).any(|(a, b)| a != b.as_ref()) {
            return Err(Error::FeatureMismatch {
                expected: own.join(","),
                found: names.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(","),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let (hyperparams, payload) = match self {
            Model::RandomForest(m) => (
                serde_json::to_value(RfHyper {
                    params: m.params,
                    max_features_resolved: m.max_features,
                    seed: m.seed,
                })?,
                serde_json::to_value(TreesPayload {
                    init_value: None,
                    trees: m.trees.iter().map(FlatTree::from_tree).collect(),
                })?,
            ),
            Model::GradientBoosting(m) => (
                serde_json::to_value(GbHyper {
                    params: m.params,
                    seed: m.seed,
                })?,
                serde_json::to_value(TreesPayload {
                    init_value: Some(m.init_value),
                    trees: m.trees.iter().map(FlatTree::from_tree).collect(),
                })?,
            ),
            Model::NaiveBayes(m) => (
                serde_json::json!({ "var_smoothing": VAR_SMOOTHING }),
                serde_json::to_value(NbPayload {
                    priors: m.priors,
                    means: m.means.clone(),
                    variances: m.variances.clone(),
                    epsilon: m.epsilon,
                })?,
            ),
            Model::Linear(m) => (
                serde_json::json!({ "ridge_fallback": RIDGE_FALLBACK }),
                serde_json::to_value(OlsPayload {
                    coefficients: m.coefficients.clone(),
                    intercept: m.intercept,
                    ridge: m.ridge,
                })?,
            ),
        };
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            model_type: self.model_type().as_str().to_string(),
            feature_names: self.feature_names().to_vec(),
            hyperparams,
            payload,
        };
        let mut s = serde_json::to_string(&file)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let value: Value = serde_json::from_str(text).map_err(|e| {
            if e.is_eof() {
                Error::ModelTruncated(e.to_string())
            } else {
                Error::ModelSchema(e.to_string())
            }
        })?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::ModelSchema("top level is not an object".into()))?;
        let version = obj
            .get("format_version")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::ModelSchema("missing format_version".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::ModelVersion {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let type_name = obj
            .get("model_type")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::ModelSchema("missing model_type".into()))?;
        let kind = ModelType::parse(type_name).ok_or_else(|| Error::UnsupportedModel(type_name.to_string()))?;
        let file: ModelFile = schema(serde_json::from_value(value.clone()))?;
        let names = file.feature_names;
        let d = names.len();
        let model = match kind {
            ModelType::RandomForest => {
                let h: RfHyper = schema(serde_json::from_value(file.hyperparams))?;
                let p: TreesPayload = schema(serde_json::from_value(file.payload))?;
                if p.trees.len() != h.params.n_trees {
                    return Err(Error::ModelSchema(format!(
                        "n_trees is {} but {} trees are stored",
                        h.params.n_trees,
                        p.trees.len()
                    )));
                }
                let trees = p.trees.into_iter().map(|t| t.into_tree(d, true)).collect::<Result<_>>()?;
                Model::RandomForest(RandomForestModel {
                    trees,
                    params: h.params,
                    max_features: h.max_features_resolved,
                    seed: h.seed,
                    feature_names: names,
                })
            }
            ModelType::GradientBoosting => {
                let h: GbHyper = schema(serde_json::from_value(file.hyperparams))?;
                let p: TreesPayload = schema(serde_json::from_value(file.payload))?;
                if p.trees.len() != h.params.n_stages {
                    return Err(Error::ModelSchema(format!(
                        "n_stages is {} but {} trees are stored",
                        h.params.n_stages,
                        p.trees.len()
                    )));
                }
                let init_value = p
                    .init_value
                    .ok_or_else(|| Error::ModelSchema("missing init_value".into()))?;
                let trees = p.trees.into_iter().map(|t| t.into_tree(d, false)).collect::<Result<_>>()?;
                Model::GradientBoosting(GradientBoostedModel {
                    init_value,
                    trees,
                    params: h.params,
                    seed: h.seed,
                    feature_names: names,
                })
            }
            ModelType::NaiveBayes => {
                let p: NbPayload = schema(serde_json::from_value(file.payload))?;
                let lengths_ok = p.means.iter().chain(&p.variances).all(|v| v.len() == d);
                if !lengths_ok || p.variances.iter().flatten().any(|&v| v <= 0.0) {
                    return Err(Error::ModelSchema("naive Bayes parameters malformed".into()));
                }
                Model::NaiveBayes(GaussianNbModel {
                    priors: p.priors,
                    means: p.means,
                    variances: p.variances,
                    epsilon: p.epsilon,
                    feature_names: names,
                })
            }
            ModelType::Linear => {
                let p: OlsPayload = schema(serde_json::from_value(file.payload))?;
                if p.coefficients.len() != d {
                    return Err(Error::ModelSchema(format!(
                        "{} coefficients for {d} features",
                        p.coefficients.len()
                    )));
                }
                Model::Linear(LinearModel {
                    coefficients: p.coefficients,
                    intercept: p.intercept,
                    ridge: p.ridge,
                    feature_names: names,
                })
            }
        };
        Ok(model)
    }
}

fn schema<T>(r: std::result::Result<T, serde_json::Error>) -> Result<T> {
    r.map_err(|e| Error::ModelSchema(e.to_string()))
}

/// Writes to a sibling temporary file, then renames it into place.
pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    let text = model.to_json()?;
    let tmp = temp_path(path);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(text.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

pub fn load_model(path: &Path) -> Result<Model> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Model::from_json(&text)
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u64,
    model_type: String,
    feature_names: Vec<String>,
    hyperparams: Value,
    payload: Value,
}

#[derive(Serialize, Deserialize)]
struct RfHyper {
    #[serde(flatten)]
    params: ForestParams,
    max_features_resolved: usize,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct GbHyper {
    #[serde(flatten)]
    params: BoostingParams,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct TreesPayload {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    init_value: Option<f64>,
    trees: Vec<FlatTree>,
}

#[derive(Serialize, Deserialize)]
struct NbPayload {
    priors: [f64; 2],
    means: [Vec<f64>; 2],
    variances: [Vec<f64>; 2],
    epsilon: f64,
}

#[derive(Serialize, Deserialize)]
struct OlsPayload {
    coefficients: Vec<f64>,
    intercept: f64,
    ridge: bool,
}

/// Column-wise node arrays. Leaves have `feature = left = right = -1` and
/// `threshold = 0`; `value` holds the leaf mean or class-1 fraction.
#[derive(Serialize, Deserialize)]
struct FlatTree {
    feature: Vec<i64>,
    threshold: Vec<f64>,
    left: Vec<i64>,
    right: Vec<i64>,
    value: Vec<f64>,
    /// Per-node class counts, classification trees only; `[0, 0]` on splits.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<[u64; 2]>>,
}

impl FlatTree {
    fn from_tree(tree: &DecisionTree) -> FlatTree {
        let n = tree.nodes().len();
        let mut t = FlatTree {
            feature: Vec::with_capacity(n),
            threshold: Vec::with_capacity(n),
            left: Vec::with_capacity(n),
            right: Vec::with_capacity(n),
            value: Vec::with_capacity(n),
            counts: None,
        };
        let mut counts = Vec::with_capacity(n);
        for node in tree.nodes() {
            match *node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    t.feature.push(feature as i64);
                    t.threshold.push(threshold);
                    t.left.push(left as i64);
                    t.right.push(right as i64);
                    t.value.push(0.0);
                    counts.push([0, 0]);
                }
                TreeNode::Leaf(leaf) => {
                    t.feature.push(-1);
                    t.threshold.push(0.0);
                    t.left.push(-1);
                    t.right.push(-1);
                    t.value.push(leaf.value());
                    counts.push(match leaf {
                        LeafValue::Counts(c) => c,
                        LeafValue::Mean(_) => [0, 0],
                    });
                }
            }
        }
        if tree
            .nodes()
            .iter()
            .any(|n| matches!(n, TreeNode::Leaf(LeafValue::Counts(_))))
        {
            t.counts = Some(counts);
        }
        t
    }

    fn into_tree(self, n_features: usize, classification: bool) -> Result<DecisionTree> {
        let n = self.feature.len();
        if [self.threshold.len(), self.left.len(), self.right.len(), self.value.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(Error::ModelSchema("tree arrays differ in length".into()));
        }
        let counts = match (classification, self.counts) {
            (true, Some(c)) if c.len() == n => Some(c),
            (false, None) => None,
            _ => return Err(Error::ModelSchema("tree class counts missing or unexpected".into())),
        };
        let index = |v: i64| usize::try_from(v).map_err(|_| Error::ModelSchema(format!("bad node index {v}")));
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let node = if self.feature[i] < 0 {
                if self.left[i] != -1 || self.right[i] != -1 {
                    return Err(Error::ModelSchema(format!("leaf {i} has children")));
                }
                match &counts {
                    Some(c) if c[i][0] + c[i][1] == 0 => {
                        return Err(Error::ModelSchema(format!("leaf {i} has no examples")))
                    }
                    Some(c) => TreeNode::Leaf(LeafValue::Counts(c[i])),
                    None if !self.value[i].is_finite() => {
                        return Err(Error::ModelSchema(format!("leaf {i} value not finite")))
                    }
                    None => TreeNode::Leaf(LeafValue::Mean(self.value[i])),
                }
            } else {
                TreeNode::Split {
                    feature: index(self.feature[i])?,
                    threshold: self.threshold[i],
                    left: index(self.left[i])?,
                    right: index(self.right[i])?,
                }
            };
            nodes.push(node);
        }
        DecisionTree::from_nodes(nodes, n_features)
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let y: Vec<u8> = x.iter().map(|r| u8::from(r[0] + 0.5 * r[1] > 0.1)).collect();
        let t: Vec<f64> = x.iter().map(|r| r[0] * r[0] + r[2] + 1.0 / 3.0).collect();
        (x, y, t)
    }

    fn names() -> Vec<String> {
        vec!["a".into(), "b".into(), "c".into()]
    }

    fn all_models() -> Vec<Model> {
        let (x, y, t) = data(120, 1);
        vec![
            Model::RandomForest(
                RandomForestModel::fit(&x, &y, names(), &ForestParams { n_trees: 7, ..Default::default() }, 3).unwrap(),
            ),
            Model::GradientBoosting(
                GradientBoostedModel::fit(&x, &t, names(), &BoostingParams { n_stages: 15, ..Default::default() }, 3)
                    .unwrap(),
            ),
            Model::NaiveBayes(GaussianNbModel::fit(&x, &y, names()).unwrap()),
            Model::Linear(LinearModel::fit(&x, &t, names(), true).unwrap()),
        ]
    }

    fn outputs(m: &Model, probe: &[Vec<f64>]) -> Vec<u64> {
        probe
            .iter()
            .map(|p| match (m.as_classifier(), m.as_regressor()) {
                (Some(c), _) => c.predict_proba(p).unwrap().to_bits(),
                (_, Some(r)) => r.predict(p).unwrap().to_bits(),
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let (probe, _, _) = data(100, 99);
        let dir = tempfile::tempdir().unwrap();
        for m in all_models() {
            let path = dir.path().join(format!("{}.json", m.model_type().as_str()));
            save_model(&m, &path).unwrap();
            let back = load_model(&path).unwrap();
            assert_eq!(back, m);
            assert_eq!(outputs(&back, &probe), outputs(&m, &probe));
            assert_eq!(back.to_json().unwrap(), fs::read_to_string(&path).unwrap());
            assert!(!temp_path(&path).exists());
        }
    }

    #[test]
    fn distinct_load_errors() {
        let text = all_models().remove(0).to_json().unwrap();
        assert!(matches!(Model::from_json(&text[..text.len() / 2]), Err(Error::ModelTruncated(_))));
        let v2 = text.replacen("\"format_version\":1", "\"format_version\":2", 1);
        assert!(matches!(Model::from_json(&v2), Err(Error::ModelVersion { found: 2, expected: 1 })));
        let svm = text.replacen("\"model_type\":\"rf\"", "\"model_type\":\"svm\"", 1);
        let err = Model::from_json(&svm).unwrap_err();
        assert!(matches!(err, Error::UnsupportedModel(_)));
        assert!(err.to_string().contains("unsupported model"));
        let bad = text.replacen("\"feature\":[", "\"feature\":[99,", 1);
        assert!(matches!(Model::from_json(&bad), Err(Error::ModelSchema(_))));
        assert!(matches!(Model::from_json("[1,2]"), Err(Error::ModelSchema(_))));
    }

    #[test]
    fn feature_names_are_checked() {
        let m = all_models().remove(1);
        assert!(m.check_feature_names(&["a", "b", "c"]).is_ok());
        assert!(matches!(m.check_feature_names(&["a", "c", "b"]), Err(Error::FeatureMismatch { .. })));
        assert!(m.check_feature_names(&["a", "b"]).is_err());
    }

    #[test]
    fn model_bytes_are_deterministic() {
        let a: Vec<String> = all_models().iter().map(|m| m.to_json().unwrap()).collect();
        let b: Vec<String> = all_models().iter().map(|m| m.to_json().unwrap()).collect();
        assert_eq!(a, b);
    }
}
