//! Bagged CART ensembles.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::{self, check_rows, FeatureSubsample, Tree, TreeParams};
use crate::error::{Error, Result};
use crate::rng::DeterministicRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub feature_subsample: FeatureSubsample,
    pub min_samples_leaf: usize,
    /// Draw a bootstrap resample per tree; disable only for debugging.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for RandomForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            feature_subsample: FeatureSubsample::Sqrt,
            min_samples_leaf: 1,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub n_classes: usize,
    pub dim: usize,
    pub params: RandomForestParams,
    pub trees: Vec<Tree>,
}

/// Seed handed to tree `index`'s feature sampler.
pub fn tree_seed(seed: u64, index: usize) -> u64 {
    DeterministicRng::derive(seed, index as u64).next_u64()
}

fn bootstrap_sample(seed: u64, index: usize, n: usize) -> Vec<usize> {
    // Separate stream from `tree_seed` so the two never correlate.
    let mut rng = DeterministicRng::derive(seed.rotate_left(32), index as u64);
    (0..n).map(|_| rng.below(n)).collect()
}

pub fn rf_fit(
    rows: &[&[f64]],
    labels: &[usize],
    n_classes: usize,
    params: RandomForestParams,
) -> Result<RandomForest> {
    if params.n_trees == 0 {
        return Err(Error::InvalidHyperparameter("n_trees must be at least 1"));
    }
    if rows.len() != labels.len() {
        return Err(Error::LengthMismatch(rows.len(), labels.len()));
    }
    let dim = check_rows(rows)?;
    let n = rows.len();
    let trees = (0..params.n_trees)
        .map(|t| {
            let samples = if params.bootstrap {
                bootstrap_sample(params.seed, t, n)
            } else {
                (0..n).collect()
            };
            let tree_params = TreeParams {
                max_depth: params.max_depth,
                min_samples_leaf: params.min_samples_leaf,
                feature_subsample: params.feature_subsample,
                seed: tree_seed(params.seed, t),
            };
            tree::fit_classification(rows, labels, n_classes, samples, tree_params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RandomForest {
        n_classes,
        dim,
        params,
        trees,
    })
}

impl RandomForest {
    /// Mean of the per-tree leaf class distributions.
    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimMismatch {
                row: 0,
                expected: self.dim,
                found: x.len(),
            });
        }
        let mut proba = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (p, v) in proba.iter_mut().zip(tree.leaf_value(x)) {
                *p += v;
            }
        }
        let n = self.trees.len() as f64;
        proba.iter_mut().for_each(|p| *p /= n);
        Ok(proba)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trees.is_empty() {
            return Err(Error::InvalidHyperparameter("forest has no trees"));
        }
        self.trees
            .iter()
            .try_for_each(|t| t.validate(self.dim, self.n_classes))
    }
}
