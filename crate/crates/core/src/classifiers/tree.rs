//! Greedy CART trees stored as flat arrays.
//!
//! Classification trees split on Gini impurity and keep class frequencies in
//! their leaves; regression trees (the boosting base learner) split on squared
//! error and keep the mean target. Candidate thresholds are midpoints between
//! consecutive distinct feature values; a sample goes left when
//! `x[feature] <= threshold`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::DeterministicRng;

const LEAF: i32 = -1;

/// Flattened binary tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Split feature, or -1 for a leaf.
    pub feature: Vec<i32>,
    pub threshold: Vec<f64>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    /// Leaf payload (class distribution or `[mean]`); empty for internal nodes.
    pub value: Vec<Vec<f64>>,
}

impl Tree {
    fn empty() -> Self {
        Self {
            feature: Vec::new(),
            threshold: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            value: Vec::new(),
        }
    }

    fn push_leaf(&mut self, value: Vec<f64>) -> usize {
        self.feature.push(LEAF);
        self.threshold.push(0.0);
        self.left.push(0);
        self.right.push(0);
        self.value.push(value);
        self.feature.len() - 1
    }

    pub fn n_nodes(&self) -> usize {
        self.feature.len()
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.feature[node] == LEAF
    }

    /// Longest root-to-leaf path in edges.
    pub fn depth(&self) -> usize {
        fn walk(tree: &Tree, node: usize) -> usize {
            if tree.is_leaf(node) {
                0
            } else {
                1 + walk(tree, tree.left[node] as usize).max(walk(tree, tree.right[node] as usize))
            }
        }
        walk(self, 0)
    }

    pub fn leaf_value(&self, x: &[f64]) -> &[f64] {
        let mut node = 0;
        while !self.is_leaf(node) {
            node = if x[self.feature[node] as usize] <= self.threshold[node] {
                self.left[node] as usize
            } else {
                self.right[node] as usize
            };
        }
        &self.value[node]
    }

    /// Structural checks used after deserialization.
    pub fn validate(&self, dim: usize, leaf_len: usize) -> Result<()> {
        let n = self.n_nodes();
        let consistent = n > 0
            && self.threshold.len() == n
            && self.left.len() == n
            && self.right.len() == n
            && self.value.len() == n;
        if !consistent {
            return Err(Error::InvalidHyperparameter("tree arrays have inconsistent lengths"));
        }
        for node in 0..n {
            if self.is_leaf(node) {
                if self.value[node].len() != leaf_len {
                    return Err(Error::InvalidHyperparameter("tree leaf has wrong width"));
                }
            } else if self.feature[node] < 0
                || self.feature[node] as usize >= dim
                || self.left[node] as usize <= node
                || self.right[node] as usize <= node
                || self.left[node] as usize >= n
                || self.right[node] as usize >= n
            {
                return Err(Error::InvalidHyperparameter("tree node references are invalid"));
            }
        }
        Ok(())
    }
}

/// How many features a node may consider.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubsample {
    All,
    /// `max(1, floor(sqrt(d)))`.
    Sqrt,
    Count(usize),
}

impl FeatureSubsample {
    pub fn resolve(self, dim: usize) -> usize {
        match self {
            FeatureSubsample::All => dim,
            FeatureSubsample::Sqrt => (libm::sqrt(dim as f64) as usize).max(1),
            FeatureSubsample::Count(k) => k.clamp(1, dim.max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until purity or `min_samples_leaf`.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub feature_subsample: FeatureSubsample,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 1,
            feature_subsample: FeatureSubsample::All,
            seed: 0,
        }
    }
}

impl TreeParams {
    fn validate(&self) -> Result<()> {
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidHyperparameter("min_samples_leaf must be at least 1"));
        }
        Ok(())
    }
}

/// Checks that rows are non-empty and share one dimension.
pub(crate) fn check_rows(rows: &[&[f64]]) -> Result<usize> {
    let dim = rows.first().ok_or(Error::EmptyTrainingSet)?.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::DimMismatch {
                row: i + 1,
                expected: dim,
                found: row.len(),
            });
        }
    }
    Ok(dim)
}

#[derive(Clone, Copy)]
enum Targets<'a> {
    Classes { labels: &'a [usize], n_classes: usize },
    Values(&'a [f64]),
}

/// Running split statistics for one side of a candidate split.
#[derive(Clone)]
enum Stats {
    Classes { counts: Vec<f64>, n: f64 },
    Values { sum: f64, n: f64 },
}

impl Stats {
    fn empty(targets: Targets<'_>) -> Self {
        match targets {
            Targets::Classes { n_classes, .. } => Stats::Classes {
                counts: vec![0.0; n_classes],
                n: 0.0,
            },
            Targets::Values(_) => Stats::Values { sum: 0.0, n: 0.0 },
        }
    }

    fn add(&mut self, targets: Targets<'_>, sample: usize, sign: f64) {
        match (self, targets) {
            (Stats::Classes { counts, n }, Targets::Classes { labels, .. }) => {
                counts[labels[sample]] += sign;
                *n += sign;
            }
            (Stats::Values { sum, n }, Targets::Values(values)) => {
                *sum += sign * values[sample];
                *n += sign;
            }
            _ => unreachable!("stats and targets disagree"),
        }
    }

    /// Proxy score whose increase equals the impurity decrease:
    /// Σ c²/n for Gini, s²/n for squared error.
    fn score(&self) -> f64 {
        match self {
            Stats::Classes { counts, n } if *n > 0.0 => counts.iter().map(|c| c * c).sum::<f64>() / n,
            Stats::Values { sum, n } if *n > 0.0 => sum * sum / n,
            _ => 0.0,
        }
    }

    fn leaf(&self) -> Vec<f64> {
        match self {
            Stats::Classes { counts, n } => counts.iter().map(|c| c / n).collect(),
            Stats::Values { sum, n } => vec![sum / n],
        }
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

struct Builder<'a> {
    rows: &'a [&'a [f64]],
    targets: Targets<'a>,
    params: TreeParams,
    dim: usize,
    max_features: usize,
    rng: DeterministicRng,
    tree: Tree,
}

impl<'a> Builder<'a> {
    fn new(rows: &'a [&'a [f64]], targets: Targets<'a>, params: TreeParams, dim: usize) -> Self {
        Self {
            rows,
            targets,
            params,
            dim,
            max_features: params.feature_subsample.resolve(dim),
            rng: DeterministicRng::new(params.seed),
            tree: Tree::empty(),
        }
    }

    fn value(&self, sample: usize, feature: usize) -> f64 {
        self.rows[sample][feature]
    }

    fn stats_of(&self, samples: &[usize]) -> Stats {
        let mut stats = Stats::empty(self.targets);
        for &s in samples {
            stats.add(self.targets, s, 1.0);
        }
        stats
    }

    fn is_pure(&self, samples: &[usize]) -> bool {
        match self.targets {
            Targets::Classes { labels, .. } => samples.iter().all(|&s| labels[s] == labels[samples[0]]),
            Targets::Values(values) => samples.iter().all(|&s| values[s] == values[samples[0]]),
        }
    }

    fn should_stop(&self, samples: &[usize], depth: usize) -> bool {
        samples.len() < 2 * self.params.min_samples_leaf
            || self.params.max_depth.is_some_and(|d| depth >= d)
            || self.is_pure(samples)
    }

    /// Best threshold for one feature given node samples sorted by it.
    fn scan(&self, feature: usize, sorted: &[usize], total: &Stats, best: &mut Option<Split>) {
        let min_leaf = self.params.min_samples_leaf;
        let n = sorted.len();
        let mut left = Stats::empty(self.targets);
        let mut right = total.clone();
        for i in 0..n - 1 {
            left.add(self.targets, sorted[i], 1.0);
            right.add(self.targets, sorted[i], -1.0);
            let (lo, hi) = (self.value(sorted[i], feature), self.value(sorted[i + 1], feature));
            if lo == hi || i + 1 < min_leaf || n - i - 1 < min_leaf {
                continue;
            }
            let score = left.score() + right.score();
            if best.as_ref().is_none_or(|b| score > b.score) {
                let mid = lo + (hi - lo) / 2.0;
                *best = Some(Split {
                    feature,
                    threshold: if mid < hi { mid } else { lo },
                    score,
                });
            }
        }
    }

    fn accept(&self, split: &Option<Split>, parent: &Stats) -> bool {
        match (split, self.targets) {
            (None, _) => false,
            (Some(s), Targets::Values(_)) => s.score > parent.score(),
            (Some(_), Targets::Classes { .. }) => true,
        }
    }

    fn sort_by_feature(&self, samples: &mut [usize], feature: usize) {
        samples.sort_by(|&a, &b| {
            self.value(a, feature)
                .total_cmp(&self.value(b, feature))
                .then(a.cmp(&b))
        });
    }

    // Subsampled features: sort the node's samples per candidate feature.
    fn grow_sampled(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let total = self.stats_of(&samples);
        if self.should_stop(&samples, depth) {
            return self.tree.push_leaf(total.leaf());
        }
        let order = self.rng.permutation(self.dim);
        let mut best = None;
        let mut visited = 0;
        let mut sorted = samples.clone();
        for &f in &order {
            if visited == self.max_features {
                break;
            }
            self.sort_by_feature(&mut sorted, f);
            if self.value(sorted[0], f) == self.value(sorted[sorted.len() - 1], f) {
                continue;
            }
            visited += 1;
            self.scan(f, &sorted, &total, &mut best);
        }
        if !self.accept(&best, &total) {
            return self.tree.push_leaf(total.leaf());
        }
        let split = best.expect("accepted split");
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&s| self.value(s, split.feature) <= split.threshold);
        let node = self.tree.push_leaf(Vec::new());
        let l = self.grow_sampled(left, depth + 1);
        let r = self.grow_sampled(right, depth + 1);
        self.link(node, &split, l, r);
        node
    }

    // All features: per-feature orders are sorted once and stably partitioned
    // at each split, so a level costs O(d·n) instead of O(d·n log n).
    fn grow_presorted(&mut self, sorted: &mut [Vec<usize>], lo: usize, hi: usize, depth: usize, side: &mut [bool]) -> usize {
        let node_samples = &sorted[0][lo..hi];
        let total = self.stats_of(node_samples);
        if self.should_stop(node_samples, depth) {
            return self.tree.push_leaf(total.leaf());
        }
        let mut best = None;
        for (f, order) in sorted.iter().enumerate() {
            let slice = &order[lo..hi];
            if self.value(slice[0], f) == self.value(slice[slice.len() - 1], f) {
                continue;
            }
            self.scan(f, slice, &total, &mut best);
        }
        if !self.accept(&best, &total) {
            return self.tree.push_leaf(total.leaf());
        }
        let split = best.expect("accepted split");
        let mut n_left = 0;
        for p in lo..hi {
            let s = sorted[0][p];
            side[s] = self.value(s, split.feature) <= split.threshold;
        }
        let mut scratch = Vec::with_capacity(hi - lo);
        for order in sorted.iter_mut() {
            scratch.clear();
            let slice = &mut order[lo..hi];
            let mut w = 0;
            for i in 0..slice.len() {
                let s = slice[i];
                if side[s] {
                    slice[w] = s;
                    w += 1;
                } else {
                    scratch.push(s);
                }
            }
            slice[w..].copy_from_slice(&scratch);
            n_left = w;
        }
        let node = self.tree.push_leaf(Vec::new());
        let l = self.grow_presorted(sorted, lo, lo + n_left, depth + 1, side);
        let r = self.grow_presorted(sorted, lo + n_left, hi, depth + 1, side);
        self.link(node, &split, l, r);
        node
    }

    fn link(&mut self, node: usize, split: &Split, left: usize, right: usize) {
        self.tree.feature[node] = split.feature as i32;
        self.tree.threshold[node] = split.threshold;
        self.tree.left[node] = left as u32;
        self.tree.right[node] = right as u32;
        self.tree.value[node] = Vec::new();
    }

    fn build(mut self, samples: Vec<usize>) -> Tree {
        if self.max_features >= self.dim {
            // `side` is indexed by row; samples may repeat (bootstrap) but a
            // row's side is a function of its features, so repeats agree.
            let mut side = vec![false; self.rows.len()];
            let mut sorted: Vec<Vec<usize>> = (0..self.dim)
                .map(|f| {
                    let mut order = samples.clone();
                    self.sort_by_feature(&mut order, f);
                    order
                })
                .collect();
            if self.dim == 0 {
                let total = self.stats_of(&samples);
                self.tree.push_leaf(total.leaf());
            } else {
                let n = samples.len();
                self.grow_presorted(&mut sorted, 0, n, 0, &mut side);
            }
        } else {
            self.grow_sampled(samples, 0);
        }
        self.tree
    }
}

/// Fits a classification tree on the rows listed in `samples` (repeats allowed).
pub(crate) fn fit_classification(
    rows: &[&[f64]],
    labels: &[usize],
    n_classes: usize,
    samples: Vec<usize>,
    params: TreeParams,
) -> Result<Tree> {
    params.validate()?;
    let dim = check_rows(rows)?;
    if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::LabelOutOfRange { label, n_classes });
    }
    if samples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    Ok(Builder::new(rows, Targets::Classes { labels, n_classes }, params, dim).build(samples))
}

/// Fits a squared-error regression tree on all rows.
pub(crate) fn fit_regression(rows: &[&[f64]], targets: &[f64], params: TreeParams) -> Result<Tree> {
    params.validate()?;
    let dim = check_rows(rows)?;
    let samples = (0..rows.len()).collect();
    Ok(Builder::new(rows, Targets::Values(targets), params, dim).build(samples))
}

/// A single classification tree exposed as a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub n_classes: usize,
    pub dim: usize,
    pub params: TreeParams,
    pub tree: Tree,
}

/// Fits one CART classification tree on every training row.
pub fn cart_fit(rows: &[&[f64]], labels: &[usize], n_classes: usize, params: TreeParams) -> Result<DecisionTree> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch(rows.len(), labels.len()));
    }
    let tree = fit_classification(rows, labels, n_classes, (0..rows.len()).collect(), params)?;
    Ok(DecisionTree {
        n_classes,
        dim: rows[0].len(),
        params,
        tree,
    })
}

impl DecisionTree {
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimMismatch {
                row: 0,
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self.tree.leaf_value(x).to_vec())
    }
}
