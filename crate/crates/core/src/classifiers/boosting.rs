//! Gradient-boosted regression trees for classification.
//!
//! Each round fits one squared-error tree per class to the pseudo-residuals
//! of the softmax cross-entropy, `1[y = k] - p_k`, and adds
//! `learning_rate * leaf_mean` to that class score. The binary case keeps a
//! single score `F` with `p = sigmoid(F)` and one tree per round. Scores
//! start at zero, so an empty ensemble predicts the uniform distribution.
//! Updates are first-order only (no Hessian weighting, no subsampling).

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::{self, check_rows, FeatureSubsample, Tree, TreeParams};
use super::softmax_in_place;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostingParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for GradientBoostingParams {
    fn default() -> Self {
        Self {
            n_rounds: 100,
            learning_rate: 0.3,
            max_depth: 6,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosted {
    pub n_classes: usize,
    pub dim: usize,
    pub params: GradientBoostingParams,
    /// `rounds[r]` holds one tree per score (a single tree for two classes).
    pub rounds: Vec<Vec<Tree>>,
}

/// Per-round training diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoostingTrace {
    /// Mean training cross-entropy before round 0 and after every round.
    pub losses: Vec<f64>,
    /// Raw scores `[sample][score]` at the start of each round.
    pub scores: Vec<Vec<Vec<f64>>>,
    /// Pseudo-residuals `[sample][score]` the round's trees were fitted to.
    pub residuals: Vec<Vec<Vec<f64>>>,
}

fn n_scores(n_classes: usize) -> usize {
    if n_classes == 2 {
        1
    } else {
        n_classes
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// Class distribution from raw scores.
pub fn scores_to_proba(scores: &[f64], n_classes: usize) -> Vec<f64> {
    if n_classes == 2 {
        let p = sigmoid(scores[0]);
        vec![1.0 - p, p]
    } else {
        let mut p = scores.to_vec();
        softmax_in_place(&mut p);
        p
    }
}

/// Negative gradient of the cross-entropy with respect to the raw scores.
pub fn pseudo_residuals(scores: &[f64], label: usize, n_classes: usize) -> Vec<f64> {
    let p = scores_to_proba(scores, n_classes);
    if n_classes == 2 {
        vec![f64::from(label == 1) - p[1]]
    } else {
        p.iter()
            .enumerate()
            .map(|(k, pk)| f64::from(k == label) - pk)
            .collect()
    }
}

/// Cross-entropy `-ln p_label` of raw scores, computed via log-sum-exp.
pub fn cross_entropy(scores: &[f64], label: usize, n_classes: usize) -> f64 {
    if n_classes == 2 {
        // -ln sigmoid(±F) = softplus(∓F)
        let z = if label == 1 { -scores[0] } else { scores[0] };
        z.max(0.0) + libm::log1p(libm::exp(-z.abs()))
    } else {
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + libm::log(scores.iter().map(|s| libm::exp(s - max)).sum::<f64>());
        lse - scores[label]
    }
}

fn mean_loss(scores: &[Vec<f64>], labels: &[usize], n_classes: usize) -> f64 {
    scores
        .iter()
        .zip(labels)
        .map(|(s, &y)| cross_entropy(s, y, n_classes))
        .sum::<f64>()
        / labels.len() as f64
}

pub fn gbt_fit(
    rows: &[&[f64]],
    labels: &[usize],
    n_classes: usize,
    params: GradientBoostingParams,
) -> Result<GradientBoosted> {
    fit(rows, labels, n_classes, params, None)
}

/// As [`gbt_fit`], also recording losses, scores and residuals per round.
pub fn gbt_fit_traced(
    rows: &[&[f64]],
    labels: &[usize],
    n_classes: usize,
    params: GradientBoostingParams,
) -> Result<(GradientBoosted, BoostingTrace)> {
    let mut trace = BoostingTrace::default();
    let model = fit(rows, labels, n_classes, params, Some(&mut trace))?;
    Ok((model, trace))
}

fn fit(
    rows: &[&[f64]],
    labels: &[usize],
    n_classes: usize,
    params: GradientBoostingParams,
    mut trace: Option<&mut BoostingTrace>,
) -> Result<GradientBoosted> {
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch(rows.len(), labels.len()));
    }
    let dim = check_rows(rows)?;
    if n_classes < 2 {
        return Err(Error::InvalidHyperparameter("boosting needs at least 2 classes"));
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= n_classes) {
        return Err(Error::LabelOutOfRange { label, n_classes });
    }
    if !(params.learning_rate >= 0.0) || !params.learning_rate.is_finite() {
        return Err(Error::InvalidHyperparameter("learning_rate must be finite and non-negative"));
    }
    let width = n_scores(n_classes);
    let tree_params = TreeParams {
        max_depth: Some(params.max_depth),
        min_samples_leaf: params.min_samples_leaf,
        feature_subsample: FeatureSubsample::All,
        seed: params.seed,
    };
    if tree_params.min_samples_leaf == 0 {
        return Err(Error::InvalidHyperparameter("min_samples_leaf must be at least 1"));
    }
    let mut scores = vec![vec![0.0; width]; rows.len()];
    if let Some(t) = trace.as_deref_mut() {
        t.losses.push(mean_loss(&scores, labels, n_classes));
    }
    let mut rounds = Vec::with_capacity(params.n_rounds);
    for _ in 0..params.n_rounds {
        let residuals: Vec<Vec<f64>> = scores
            .iter()
            .zip(labels)
            .map(|(s, &y)| pseudo_residuals(s, y, n_classes))
            .collect();
        let start = if trace.is_some() { scores.clone() } else { Vec::new() };
        let mut trees = Vec::with_capacity(width);
        for k in 0..width {
            let target: Vec<f64> = residuals.iter().map(|r| r[k]).collect();
            trees.push(tree::fit_regression(rows, &target, tree_params)?);
        }
        for (row, s) in rows.iter().zip(scores.iter_mut()) {
            for (k, tree) in trees.iter().enumerate() {
                s[k] += params.learning_rate * tree.leaf_value(row)[0];
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.scores.push(start);
            t.residuals.push(residuals);
            t.losses.push(mean_loss(&scores, labels, n_classes));
        }
        rounds.push(trees);
    }
    Ok(GradientBoosted {
        n_classes,
        dim,
        params,
        rounds,
    })
}

impl GradientBoosted {
    pub fn raw_scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimMismatch {
                row: 0,
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut scores = vec![0.0; n_scores(self.n_classes)];
        for trees in &self.rounds {
            for (k, tree) in trees.iter().enumerate() {
                scores[k] += self.params.learning_rate * tree.leaf_value(x)[0];
            }
        }
        Ok(scores)
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(scores_to_proba(&self.raw_scores(x)?, self.n_classes))
    }

    pub fn validate(&self) -> Result<()> {
        let width = n_scores(self.n_classes);
        for trees in &self.rounds {
            if trees.len() != width {
                return Err(Error::InvalidHyperparameter("boosting round has wrong tree count"));
            }
            for t in trees {
                t.validate(self.dim, 1)?;
            }
        }
        Ok(())
    }
}
