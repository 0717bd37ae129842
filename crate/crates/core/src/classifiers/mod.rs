//! Classifiers behind one probabilistic contract.

pub mod boosting;
pub mod forest;
pub mod naive_bayes;
pub mod tree;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use boosting::{gbt_fit, gbt_fit_traced, BoostingTrace, GradientBoosted, GradientBoostingParams};
pub use forest::{rf_fit, RandomForest, RandomForestParams};
pub use naive_bayes::{nb_fit, nb_predict_proba, NaiveBayesModel};
pub use tree::{cart_fit, DecisionTree, FeatureSubsample, TreeParams};

use crate::error::{Error, Result};
use crate::features::{CountVector, FeatureRow};

/// Numerically stable softmax; `-inf` entries get probability 0.
pub fn softmax_in_place(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        let uniform = 1.0 / scores.len() as f64;
        scores.iter_mut().for_each(|s| *s = uniform);
        return;
    }
    let mut total = 0.0;
    for s in scores.iter_mut() {
        *s = libm::exp(*s - max);
        total += *s;
    }
    scores.iter_mut().for_each(|s| *s /= total);
}

/// Index of the largest probability, lowest index on ties.
pub fn argmax(proba: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in proba.iter().enumerate().skip(1) {
        if p > proba[best] {
            best = i;
        }
    }
    best
}

/// A fitted model producing class distributions.
pub trait ProbabilisticModel {
    fn n_classes(&self) -> usize;

    fn predict_proba(&self, x: &FeatureRow) -> Result<Vec<f64>>;

    fn predict(&self, x: &FeatureRow) -> Result<usize> {
        self.predict_proba(x).map(|p| argmax(&p))
    }
}

/// Learner choice plus hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "hyperparams", rename_all = "snake_case")]
pub enum ClassifierSpec {
    NaiveBayes { alpha: f64 },
    RandomForest(RandomForestParams),
    GradientBoosting(GradientBoostingParams),
}

impl ClassifierSpec {
    pub fn naive_bayes() -> Self {
        ClassifierSpec::NaiveBayes { alpha: 1.0 }
    }

    pub fn random_forest() -> Self {
        ClassifierSpec::RandomForest(RandomForestParams::default())
    }

    pub fn gradient_boosting() -> Self {
        ClassifierSpec::GradientBoosting(GradientBoostingParams::default())
    }

    /// Short name used in model specs: `nb`, `rf` or `gbt`.
    pub fn short_name(&self) -> &'static str {
        match self {
            ClassifierSpec::NaiveBayes { .. } => "nb",
            ClassifierSpec::RandomForest(_) => "rf",
            ClassifierSpec::GradientBoosting(_) => "gbt",
        }
    }

    pub fn from_short_name(name: &str) -> Option<Self> {
        match name {
            "nb" => Some(Self::naive_bayes()),
            "rf" => Some(Self::random_forest()),
            "gbt" | "xgboost" => Some(Self::gradient_boosting()),
            _ => None,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ClassifierSpec::NaiveBayes { .. } => 0,
            ClassifierSpec::RandomForest(p) => p.seed,
            ClassifierSpec::GradientBoosting(p) => p.seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        match &mut self {
            ClassifierSpec::NaiveBayes { .. } => {}
            ClassifierSpec::RandomForest(p) => p.seed = seed,
            ClassifierSpec::GradientBoosting(p) => p.seed = seed,
        }
        self
    }

    pub fn needs_counts(&self) -> bool {
        matches!(self, ClassifierSpec::NaiveBayes { .. })
    }
}

/// Training rows in the representation the chosen learner consumes.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainingData {
    Counts { rows: Vec<CountVector>, vocab_size: usize },
    Dense { rows: Vec<Vec<f64>> },
}

impl TrainingData {
    pub fn len(&self) -> usize {
        match self {
            TrainingData::Counts { rows, .. } => rows.len(),
            TrainingData::Dense { rows } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum TrainedModel {
    NaiveBayes(NaiveBayesModel),
    RandomForest(RandomForest),
    GradientBoosting(GradientBoosted),
}

/// Fits `spec` on `data` with labels in `0..n_classes`.
pub fn fit(spec: &ClassifierSpec, data: &TrainingData, labels: &[usize], n_classes: usize) -> Result<TrainedModel> {
    if data.len() != labels.len() {
        return Err(Error::LengthMismatch(data.len(), labels.len()));
    }
    if data.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    match (spec, data) {
        (ClassifierSpec::NaiveBayes { alpha }, TrainingData::Counts { rows, vocab_size }) => {
            let train: Vec<(CountVector, usize)> = rows.iter().cloned().zip(labels.iter().copied()).collect();
            nb_fit(&train, n_classes, *vocab_size, *alpha).map(TrainedModel::NaiveBayes)
        }
        (ClassifierSpec::RandomForest(params), TrainingData::Dense { rows }) => {
            let rows: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
            rf_fit(&rows, labels, n_classes, *params).map(TrainedModel::RandomForest)
        }
        (ClassifierSpec::GradientBoosting(params), TrainingData::Dense { rows }) => {
            let rows: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
            gbt_fit(&rows, labels, n_classes, *params).map(TrainedModel::GradientBoosting)
        }
        (ClassifierSpec::NaiveBayes { .. }, _) => Err(Error::FeatureKind("token counts")),
        _ => Err(Error::FeatureKind("dense embeddings")),
    }
}

impl TrainedModel {
    pub fn kind_name(&self) -> &'static str {
        match self {
            TrainedModel::NaiveBayes(_) => "naive_bayes",
            TrainedModel::RandomForest(_) => "random_forest",
            TrainedModel::GradientBoosting(_) => "gradient_boosting",
        }
    }

    /// Shape checks for models loaded from disk.
    pub fn validate(&self) -> Result<()> {
        match self {
            TrainedModel::NaiveBayes(m) => m.validate(),
            TrainedModel::RandomForest(m) => m.validate(),
            TrainedModel::GradientBoosting(m) => m.validate(),
        }
    }

    pub fn describe(&self) -> String {
        alloc::format!("{} over {} classes", self.kind_name(), self.n_classes())
    }
}

impl ProbabilisticModel for TrainedModel {
    fn n_classes(&self) -> usize {
        match self {
            TrainedModel::NaiveBayes(m) => m.n_classes,
            TrainedModel::RandomForest(m) => m.n_classes,
            TrainedModel::GradientBoosting(m) => m.n_classes,
        }
    }

    fn predict_proba(&self, x: &FeatureRow) -> Result<Vec<f64>> {
        match (self, x) {
            (TrainedModel::NaiveBayes(m), FeatureRow::Counts(c)) => Ok(m.predict_proba(c)),
            (TrainedModel::RandomForest(m), FeatureRow::Dense(v)) => m.predict_proba(v),
            (TrainedModel::GradientBoosting(m), FeatureRow::Dense(v)) => m.predict_proba(v),
            (TrainedModel::NaiveBayes(_), _) => Err(Error::FeatureKind("token counts")),
            _ => Err(Error::FeatureKind("dense embeddings")),
        }
    }
}

impl ProbabilisticModel for DecisionTree {
    fn n_classes(&self) -> usize {
        self.n_classes
    }

    fn predict_proba(&self, x: &FeatureRow) -> Result<Vec<f64>> {
        match x {
            FeatureRow::Dense(v) => DecisionTree::predict_proba(self, v),
            FeatureRow::Counts(_) => Err(Error::FeatureKind("dense embeddings")),
        }
    }
}
