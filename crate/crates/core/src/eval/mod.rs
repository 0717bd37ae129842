//! Metrics, cross-validation and the paired single-vs-cascade comparison.

pub mod compare;
pub mod metrics;
pub mod wilcoxon;

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use compare::{compare_approaches, PairedComparison};
pub use metrics::{confusion, confusion_five, confusion_named, metrics, percent, ClassMetrics, ConfusionMatrix, MetricBundle};
pub use wilcoxon::{wilcoxon_signed_rank, PValueMethod, WilcoxonTest};

use crate::cascade::{LabelPredictor, PipelineSpec};
use crate::corpus::{kfold, Corpus, HumourLabel, SplitSpec};
use crate::error::{Error, Result};
use crate::features::EmbeddingStore;

/// Produces a fresh predictor from a training corpus.
pub trait PipelineTrainer {
    type Model: LabelPredictor;

    fn train(&self, train: &Corpus, store: &EmbeddingStore) -> Result<Self::Model>;
}

impl PipelineTrainer for PipelineSpec {
    type Model = crate::cascade::FittedPipeline;

    fn train(&self, train: &Corpus, store: &EmbeddingStore) -> Result<Self::Model> {
        PipelineSpec::train(self, train, store)
    }
}

/// Five-class predictions, confusion matrix and metrics on a labelled corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub ids: Vec<alloc::string::String>,
    pub truth: Vec<HumourLabel>,
    pub predicted: Vec<HumourLabel>,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricBundle,
}

pub fn evaluate(model: &impl LabelPredictor, corpus: &Corpus, store: &EmbeddingStore) -> Result<EvalReport> {
    let truth = corpus.gold_labels()?;
    let predicted = corpus
        .instances()
        .iter()
        .map(|i| model.predict_label(i, store))
        .collect::<Result<Vec<_>>>()?;
    let confusion = confusion_five(&truth, &predicted)?;
    let metrics = metrics(&confusion)?;
    Ok(EvalReport {
        ids: corpus.instances().iter().map(|i| i.id.clone()).collect(),
        truth,
        predicted,
        confusion,
        metrics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub folds: Vec<EvalReport>,
    /// Arithmetic mean of the per-fold bundles.
    pub mean: MetricBundle,
    /// Sum of the per-fold confusion matrices.
    pub pooled: ConfusionMatrix,
}

/// Trains a fresh pipeline per fold and evaluates it on the held-out block.
/// Every class present in `corpus` must occur in each fold's training part.
pub fn cross_validate<T: PipelineTrainer>(
    corpus: &Corpus,
    trainer: &T,
    split: &SplitSpec,
    store: &EmbeddingStore,
) -> Result<CrossValidation> {
    corpus.gold_labels()?;
    let folds = kfold(corpus, split)?;
    let present: Vec<HumourLabel> = HumourLabel::ALL.into_iter().filter(|&l| corpus.count(l) > 0).collect();
    let mut reports = Vec::with_capacity(folds.len());
    for (k, fold) in folds.iter().enumerate() {
        if let Some(missing) = present.iter().find(|&&l| fold.train.count(l) == 0) {
            return Err(Error::ClassAbsent(format!("{} missing from training part of fold {k}", missing.name())));
        }
        let model = trainer.train(&fold.train, store)?;
        reports.push(evaluate(&model, &fold.validation, store)?);
    }
    let bundles: Vec<MetricBundle> = reports.iter().map(|r| r.metrics.clone()).collect();
    let mean = MetricBundle::mean(&bundles)?;
    let mut pooled = reports[0].confusion.clone();
    for r in &reports[1..] {
        pooled.add(&r.confusion)?;
    }
    Ok(CrossValidation {
        folds: reports,
        mean,
        pooled,
    })
}
