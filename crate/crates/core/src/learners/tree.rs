//! CART trees with Gini (classification) or variance (regression) splits.
//!
//! At every node a subset of features is sampled without replacement, the
//! candidate thresholds are midpoints between consecutive distinct values,
//! and the split with the lowest weighted child impurity wins. Ties go to
//! the lowest feature index, then the lowest threshold. A node becomes a
//! leaf when it is pure, at `max_depth`, too small for two leaves, or when
//! no split keeps the weighted impurity from rising.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Gini,
    Variance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub criterion: Criterion,
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Features considered per node; `None` means all.
    pub max_features: Option<usize>,
}

impl TreeParams {
    pub fn classification() -> Self {
        TreeParams {
            criterion: Criterion::Gini,
            max_depth: None,
            min_samples_leaf: 1,
            max_features: None,
        }
    }

    pub fn regression(max_depth: usize) -> Self {
        TreeParams {
            criterion: Criterion::Variance,
            max_depth: Some(max_depth),
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeafValue {
    /// Mean target (regression).
    Mean(f64),
    /// Training examples of class 0 and class 1 that reached the leaf.
    Counts([u64; 2]),
}

impl LeafValue {
    /// Mean target, or the class-1 fraction.
    pub fn value(&self) -> f64 {
        match *self {
            LeafValue::Mean(m) => m,
            LeafValue::Counts([n0, n1]) => n1 as f64 / (n0 + n1) as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode {
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf(LeafValue),
}

/// Nodes in pre-order; the root is `nodes[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<TreeNode>,
    n_features: usize,
}

pub fn gini(counts: [u64; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (counts[0] as f64 / n, counts[1] as f64 / n);
    1.0 - p0 * p0 - p1 * p1
}

/// Population variance, computed about the mean.
pub fn variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let (sum, n) = values.clone().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        return 0.0;
    }
    let mean = sum / n as f64;
    values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64
}

pub(crate) fn check_matrix(x: &[Vec<f64>], n_targets: usize) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::Dataset("no training rows".into()));
    }
    if x.len() != n_targets {
        return Err(Error::Dataset(format!(
            "{} rows but {} targets",
            x.len(),
            n_targets
        )));
    }
    let d = x[0].len();
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset(format!("row {i} has a non-finite value")));
        }
    }
    Ok(d)
}

struct Builder<'a, R> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    params: &'a TreeParams,
    n_features: usize,
    rng: &'a mut R,
    nodes: Vec<TreeNode>,
}

struct Candidate {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl<R: Rng> Builder<'_, R> {
    fn impurity(&self, idx: &[usize]) -> f64 {
        match self.params.criterion {
            Criterion::Gini => gini(self.counts(idx)),
            Criterion::Variance => variance(idx.iter().map(|&i| self.y[i])),
        }
    }

    fn counts(&self, idx: &[usize]) -> [u64; 2] {
        let mut c = [0u64; 2];
        for &i in idx {
            c[usize::from(self.y[i] > 0.5)] += 1;
        }
        c
    }

    fn leaf(&self, idx: &[usize]) -> TreeNode {
        TreeNode::Leaf(match self.params.criterion {
            Criterion::Gini => LeafValue::Counts(self.counts(idx)),
            Criterion::Variance => {
                LeafValue::Mean(idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64)
            }
        })
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let parent = self.impurity(idx);
        let msl = self.params.min_samples_leaf.max(1);
        let stop = parent <= 0.0
            || self.params.max_depth.is_some_and(|d| depth >= d)
            || idx.len() < 2 * msl;
        let best = if stop { None } else { self.best_split(idx, parent) };
        let Some(best) = best else {
            self.nodes.push(self.leaf(idx));
            return id;
        };

        // placeholder, patched once the children exist
        self.nodes.push(TreeNode::Leaf(LeafValue::Mean(0.0)));
        let x = self.x;
        let mut split_at = 0;
        for i in 0..idx.len() {
            if x[idx[i]][best.feature] <= best.threshold {
                idx.swap(i, split_at);
                split_at += 1;
            }
        }
        let (l, r) = idx.split_at_mut(split_at);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left,
            right,
        };
        id
    }

    fn sample_features(&mut self) -> Vec<usize> {
        let d = self.n_features;
        match self.params.max_features {
            Some(m) if m < d => {
                let mut f = rand::seq::index::sample(self.rng, d, m.max(1)).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    fn best_split(&mut self, idx: &[usize], parent: f64) -> Option<Candidate> {
        let features = self.sample_features();
        let n = idx.len();
        let msl = self.params.min_samples_leaf.max(1);
        let offset = match self.params.criterion {
            Criterion::Variance => idx.iter().map(|&i| self.y[i]).sum::<f64>() / n as f64,
            Criterion::Gini => 0.0,
        };
        let mut best: Option<Candidate> = None;
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
        for f in features {
            pairs.clear();
            pairs.extend(idx.iter().map(|&i| (self.x[i][f], self.y[i] - offset)));
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            if pairs[0].0 == pairs[n - 1].0 {
                continue;
            }
            let scorer = Scorer::new(self.params.criterion, &pairs);
            let mut left = Accum::default();
            for pos in 0..n - 1 {
                left.add(pairs[pos].1, self.params.criterion);
                let (a, b) = (pairs[pos].0, pairs[pos + 1].0);
                if a == b || pos + 1 < msl || n - pos - 1 < msl {
                    continue;
                }
                let impurity = scorer.weighted(&left, pos + 1);
                if impurity > parent || best.as_ref().is_some_and(|c| impurity >= c.impurity) {
                    continue;
                }
                let mut threshold = a + (b - a) / 2.0;
                if threshold >= b {
                    threshold = a;
                }
                best = Some(Candidate {
                    impurity,
                    feature: f,
                    threshold,
                });
            }
        }
        best
    }
}

#[derive(Default, Clone, Copy)]
struct Accum {
    count: [u64; 2],
    sum: f64,
    sum_sq: f64,
}

impl Accum {
    fn add(&mut self, y: f64, criterion: Criterion) {
        match criterion {
            Criterion::Gini => self.count[usize::from(y > 0.5)] += 1,
            Criterion::Variance => {
                self.sum += y;
                self.sum_sq += y * y;
            }
        }
    }
}

struct Scorer {
    criterion: Criterion,
    total: Accum,
    n: usize,
}

impl Scorer {
    fn new(criterion: Criterion, pairs: &[(f64, f64)]) -> Self {
        let mut total = Accum::default();
        for &(_, y) in pairs {
            total.add(y, criterion);
        }
        Scorer {
            criterion,
            total,
            n: pairs.len(),
        }
    }

    /// Weighted impurity of the two children when the first `n_left`
    /// sorted examples go left.
    fn weighted(&self, left: &Accum, n_left: usize) -> f64 {
        let n = self.n as f64;
        let (nl, nr) = (n_left as f64, (self.n - n_left) as f64);
        match self.criterion {
            Criterion::Gini => {
                let right = [self.total.count[0] - left.count[0], self.total.count[1] - left.count[1]];
                (nl * gini(left.count) + nr * gini(right)) / n
            }
            Criterion::Variance => {
                let sse_l = (left.sum_sq - left.sum * left.sum / nl).max(0.0);
                let (rs, rq) = (self.total.sum - left.sum, self.total.sum_sq - left.sum_sq);
                let sse_r = (rq - rs * rs / nr).max(0.0);
                (sse_l + sse_r) / n
            }
        }
    }
}

impl DecisionTree {
    /// Fits on every row of `x`. Classification targets are 0.0 / 1.0.
    pub fn fit<R: Rng>(x: &[Vec<f64>], y: &[f64], params: &TreeParams, rng: &mut R) -> Result<Self> {
        let mut idx: Vec<usize> = (0..x.len()).collect();
        Self::fit_on(x, y, &mut idx, params, rng)
    }

    /// Fits on the rows listed in `idx` (repeats allowed, as in a bootstrap
    /// sample). `idx` is reordered.
    pub fn fit_on<R: Rng>(
        x: &[Vec<f64>],
        y: &[f64],
        idx: &mut [usize],
        params: &TreeParams,
        rng: &mut R,
    ) -> Result<Self> {
        let n_features = check_matrix(x, y.len())?;
        if idx.is_empty() {
            return Err(Error::Dataset("empty training sample".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("non-finite target".into()));
        }
        let mut b = Builder {
            x,
            y,
            params,
            n_features,
            rng,
            nodes: Vec::new(),
        };
        b.build(idx, 0);
        Ok(DecisionTree {
            nodes: b.nodes,
            n_features,
        })
    }

    pub fn from_nodes(nodes: Vec<TreeNode>, n_features: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::ModelSchema("tree without nodes".into()));
        }
        for (i, node) in nodes.iter().enumerate() {
            if let TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } = *node
            {
                if feature >= n_features {
                    return Err(Error::ModelSchema(format!(
                        "node {i}: feature {feature} out of range"
                    )));
                }
                if !threshold.is_finite() {
                    return Err(Error::ModelSchema(format!("node {i}: non-finite threshold")));
                }
                if left <= i || right <= i || left >= nodes.len() || right >= nodes.len() {
                    return Err(Error::ModelSchema(format!("node {i}: bad child index")));
                }
            }
        }
        Ok(DecisionTree { nodes, n_features })
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn leaf(&self, x: &[f64]) -> &LeafValue {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf(v) => return v,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    /// Leaf mean (regression) or class-1 fraction (classification).
    /// `x` must have `n_features` values.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.leaf(x).value()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], i: usize) -> usize {
            match nodes[i] {
                TreeNode::Leaf(_) => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf(_))).count()
    }
}
