//! Five-class pipelines: a single model, or the two-stage cascade.
//!
//! The cascade's first stage predicts {self-enhancing, self-deprecating,
//! combined, neutral}. Only a "combined" prediction reaches the second stage,
//! which separates affiliative from aggressive. Each stage carries its own
//! feature representation, so the stages may use different embedding models.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierSpec, ProbabilisticModel, TrainedModel, TrainingData};
use crate::corpus::{
    binary_to_five, four_class_to_five, remap_to_binary, remap_to_four_class, BinaryLabel, Corpus,
    FourClassLabel, HumourLabel, Instance,
};
use crate::error::{Error, Result};
use crate::features::{EmbeddingStore, FeatureRow, FeatureSpec, FittedFeatures};

/// One classifier on one feature representation, e.g. `mul:gbt` or `counts:nb`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    pub features: FeatureSpec,
    pub classifier: ClassifierSpec,
}

impl StageSpec {
    pub fn new(features: FeatureSpec, classifier: ClassifierSpec) -> Result<Self> {
        match (&features, classifier.needs_counts()) {
            (FeatureSpec::Counts, true) | (FeatureSpec::Embedding(_), false) => Ok(Self { features, classifier }),
            (FeatureSpec::Counts, false) => Err(Error::FeatureKind("dense embeddings")),
            (FeatureSpec::Embedding(_), true) => Err(Error::FeatureKind("token counts")),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.classifier = self.classifier.with_seed(seed);
        self
    }

    /// Report-friendly name in the `MUL+XGBoost` style; `NB` for counts.
    pub fn display_name(&self) -> String {
        let learner = match self.classifier {
            ClassifierSpec::NaiveBayes { .. } => "NB",
            ClassifierSpec::RandomForest(_) => "RF",
            ClassifierSpec::GradientBoosting(_) => "XGBoost",
        };
        match &self.features {
            FeatureSpec::Counts => learner.to_string(),
            FeatureSpec::Embedding(model) => format!("{}+{learner}", model.to_uppercase()),
        }
    }
}

impl fmt::Display for StageSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.features.name(), self.classifier.short_name())
    }
}

/// Parses `<embedding>:<classifier>`; a bare `nb` means `counts:nb`.
impl FromStr for StageSpec {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        let (features, learner) = match s.split_once(':') {
            Some((f, l)) => (f.trim(), l.trim()),
            None => ("counts", s.trim()),
        };
        let classifier = ClassifierSpec::from_short_name(&learner.to_lowercase())
            .ok_or_else(|| format!("unknown classifier {learner:?} (expected nb, rf or gbt)"))?;
        if features.is_empty() {
            return Err(format!("missing feature name in {s:?}"));
        }
        let features = if features.eq_ignore_ascii_case("counts") {
            FeatureSpec::Counts
        } else {
            FeatureSpec::Embedding(features.to_lowercase())
        };
        StageSpec::new(features, classifier).map_err(|e| format!("{s:?}: classifier expects {e}"))
    }
}

/// A classifier together with the feature extraction it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StagePipeline {
    pub spec: StageSpec,
    pub features: FittedFeatures,
    pub model: TrainedModel,
}

/// Anything that labels an instance with a class index in `0..n_classes`.
pub trait Stage {
    fn n_classes(&self) -> usize;

    fn predict_index(&self, instance: &Instance, store: &EmbeddingStore) -> Result<usize>;
}

impl StagePipeline {
    /// Fits features on `train` (vocabulary from train only) and then the model.
    pub fn fit(
        spec: &StageSpec,
        train: &Corpus,
        labels: &[usize],
        n_classes: usize,
        store: &EmbeddingStore,
    ) -> Result<Self> {
        let features = FittedFeatures::fit(&spec.features, train, store)?;
        let rows = train
            .instances()
            .iter()
            .map(|i| features.extract(i, store))
            .collect::<Result<Vec<_>>>()?;
        let data = match &features {
            FittedFeatures::Counts(vocab) => TrainingData::Counts {
                vocab_size: vocab.len(),
                rows: rows
                    .into_iter()
                    .map(|r| match r {
                        FeatureRow::Counts(c) => c,
                        FeatureRow::Dense(_) => unreachable!("count features yield count rows"),
                    })
                    .collect(),
            },
            FittedFeatures::Embedding { .. } => TrainingData::Dense {
                rows: rows
                    .into_iter()
                    .map(|r| match r {
                        FeatureRow::Dense(v) => v,
                        FeatureRow::Counts(_) => unreachable!("embedding features yield dense rows"),
                    })
                    .collect(),
            },
        };
        let model = classifiers::fit(&spec.classifier, &data, labels, n_classes)?;
        Ok(Self {
            spec: spec.clone(),
            features,
            model,
        })
    }

    pub fn predict_proba(&self, instance: &Instance, store: &EmbeddingStore) -> Result<Vec<f64>> {
        self.model.predict_proba(&self.features.extract(instance, store)?)
    }

    /// Restores lookup tables after deserialization and checks shapes.
    pub fn prepare(&mut self) -> Result<()> {
        self.features.reindex();
        self.model.validate()
    }
}

impl Stage for StagePipeline {
    fn n_classes(&self) -> usize {
        self.model.n_classes()
    }

    fn predict_index(&self, instance: &Instance, store: &EmbeddingStore) -> Result<usize> {
        self.model.predict(&self.features.extract(instance, store)?)
    }
}

/// Maps an instance to a five-class label.
pub trait LabelPredictor {
    fn predict_label(&self, instance: &Instance, store: &EmbeddingStore) -> Result<HumourLabel>;
}

fn require_all_classes(train: &Corpus) -> Result<Vec<HumourLabel>> {
    let labels = train.gold_labels()?;
    if let Some(missing) = HumourLabel::ALL.into_iter().find(|&l| train.count(l) == 0) {
        return Err(Error::ClassAbsent(format!("{} ({})", missing.name(), missing.code())));
    }
    Ok(labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleModelPipeline {
    pub stage: StagePipeline,
}

pub fn train_single(train: &Corpus, spec: &StageSpec, store: &EmbeddingStore) -> Result<SingleModelPipeline> {
    let labels: Vec<usize> = require_all_classes(train)?.iter().map(|l| l.index()).collect();
    let stage = StagePipeline::fit(spec, train, &labels, HumourLabel::COUNT, store)?;
    Ok(SingleModelPipeline { stage })
}

impl LabelPredictor for SingleModelPipeline {
    fn predict_label(&self, instance: &Instance, store: &EmbeddingStore) -> Result<HumourLabel> {
        HumourLabel::from_code(self.stage.predict_index(instance, store)? as i64)
    }
}

/// Which training instances the binary stage sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage2Training {
    /// Every gold affiliative/aggressive training instance.
    #[default]
    Gold,
    /// Only gold affiliative/aggressive instances that stage one routes to
    /// the combined class (ablation).
    Predicted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeModel<S1 = StagePipeline, S2 = StagePipeline> {
    pub stage1: S1,
    pub stage2: S2,
}

/// A cascade prediction and whether the binary stage was consulted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CascadePrediction {
    pub label: HumourLabel,
    pub stage2_invoked: bool,
    pub stage1: FourClassLabel,
}

pub fn train_cascade(
    train: &Corpus,
    stage1: &StageSpec,
    stage2: &StageSpec,
    routing: Stage2Training,
    store: &EmbeddingStore,
) -> Result<CascadeModel> {
    let gold = require_all_classes(train)?;
    let four: Vec<usize> = gold.iter().map(|&l| remap_to_four_class(l).index()).collect();
    let first = StagePipeline::fit(stage1, train, &four, FourClassLabel::COUNT, store)?;

    let routed = |i: &Instance| -> Result<bool> {
        match routing {
            Stage2Training::Gold => Ok(true),
            Stage2Training::Predicted => {
                Ok(first.predict_index(i, store)? == FourClassLabel::Combined.index())
            }
        }
    };
    let mut keep = Vec::new();
    for instance in train.instances() {
        let combined = matches!(instance.label, Some(HumourLabel::Affiliative | HumourLabel::Aggressive));
        keep.push(combined && routed(instance)?);
    }
    let mut flags = keep.iter();
    let subset = train.filter(|_| *flags.next().expect("one flag per instance"));
    if subset.is_empty() {
        return Err(Error::ClassAbsent("no affiliative/aggressive instances reach stage two".to_string()));
    }
    let binary = subset
        .gold_labels()?
        .into_iter()
        .map(|l| remap_to_binary(l).map(BinaryLabel::index))
        .collect::<Result<Vec<_>>>()?;
    let second = StagePipeline::fit(stage2, &subset, &binary, BinaryLabel::COUNT, store)?;
    Ok(CascadeModel {
        stage1: first,
        stage2: second,
    })
}

impl<S1: Stage, S2: Stage> CascadeModel<S1, S2> {
    pub fn new(stage1: S1, stage2: S2) -> Result<Self> {
        if stage1.n_classes() != FourClassLabel::COUNT {
            return Err(Error::InvalidHyperparameter("stage one must predict 4 classes"));
        }
        if stage2.n_classes() != BinaryLabel::COUNT {
            return Err(Error::InvalidHyperparameter("stage two must predict 2 classes"));
        }
        Ok(Self { stage1, stage2 })
    }

    pub fn cascade_predict(&self, instance: &Instance, store: &EmbeddingStore) -> Result<CascadePrediction> {
        let first = self.stage1.predict_index(instance, store)?;
        let stage1 = FourClassLabel::from_index(first)
            .ok_or(Error::LabelOutOfRange { label: first, n_classes: FourClassLabel::COUNT })?;
        if let Some(label) = four_class_to_five(stage1) {
            return Ok(CascadePrediction {
                label,
                stage2_invoked: false,
                stage1,
            });
        }
        let second = self.stage2.predict_index(instance, store)?;
        let binary = BinaryLabel::from_index(second)
            .ok_or(Error::LabelOutOfRange { label: second, n_classes: BinaryLabel::COUNT })?;
        Ok(CascadePrediction {
            label: binary_to_five(binary),
            stage2_invoked: true,
            stage1,
        })
    }

    /// Labels for every instance plus the number of stage-two calls.
    pub fn predict_corpus(&self, corpus: &Corpus, store: &EmbeddingStore) -> Result<(Vec<HumourLabel>, usize)> {
        let mut labels = Vec::with_capacity(corpus.len());
        let mut calls = 0;
        for instance in corpus.instances() {
            let p = self.cascade_predict(instance, store)?;
            calls += usize::from(p.stage2_invoked);
            labels.push(p.label);
        }
        Ok((labels, calls))
    }
}

impl<S1: Stage, S2: Stage> LabelPredictor for CascadeModel<S1, S2> {
    fn predict_label(&self, instance: &Instance, store: &EmbeddingStore) -> Result<HumourLabel> {
        self.cascade_predict(instance, store).map(|p| p.label)
    }
}

/// What to train: a single five-class model or a cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PipelineSpec {
    Single { spec: StageSpec },
    Cascade {
        stage1: StageSpec,
        stage2: StageSpec,
        #[serde(default)]
        stage2_training: Stage2Training,
    },
}

impl PipelineSpec {
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            PipelineSpec::Single { spec } => PipelineSpec::Single { spec: spec.with_seed(seed) },
            PipelineSpec::Cascade {
                stage1,
                stage2,
                stage2_training,
            } => PipelineSpec::Cascade {
                stage1: stage1.with_seed(seed),
                stage2: stage2.with_seed(seed),
                stage2_training,
            },
        }
    }

    /// Embedding models the pipeline reads.
    pub fn embedding_models(&self) -> Vec<String> {
        let stages: Vec<&StageSpec> = match self {
            PipelineSpec::Single { spec } => alloc::vec![spec],
            PipelineSpec::Cascade { stage1, stage2, .. } => alloc::vec![stage1, stage2],
        };
        let mut models: Vec<String> = stages
            .into_iter()
            .filter_map(|s| match &s.features {
                FeatureSpec::Embedding(m) => Some(m.clone()),
                FeatureSpec::Counts => None,
            })
            .collect();
        models.dedup();
        models
    }

    /// Default model name in reports: the stage display name for single models and
    /// the binary stage for cascades.
    pub fn default_name(&self) -> String {
        match self {
            PipelineSpec::Single { spec } => spec.display_name(),
            PipelineSpec::Cascade { stage2, .. } => stage2.display_name(),
        }
    }

    pub fn train(&self, train: &Corpus, store: &EmbeddingStore) -> Result<FittedPipeline> {
        match self {
            PipelineSpec::Single { spec } => train_single(train, spec, store).map(FittedPipeline::Single),
            PipelineSpec::Cascade {
                stage1,
                stage2,
                stage2_training,
            } => train_cascade(train, stage1, stage2, *stage2_training, store).map(FittedPipeline::Cascade),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FittedPipeline {
    Single(SingleModelPipeline),
    Cascade(CascadeModel),
}

impl FittedPipeline {
    pub fn prepare(&mut self) -> Result<()> {
        match self {
            FittedPipeline::Single(p) => p.stage.prepare(),
            FittedPipeline::Cascade(c) => {
                c.stage1.prepare()?;
                c.stage2.prepare()?;
                if c.stage1.n_classes() != FourClassLabel::COUNT || c.stage2.n_classes() != BinaryLabel::COUNT {
                    return Err(Error::InvalidHyperparameter("cascade stages have wrong class counts"));
                }
                Ok(())
            }
        }
    }
}

impl LabelPredictor for FittedPipeline {
    fn predict_label(&self, instance: &Instance, store: &EmbeddingStore) -> Result<HumourLabel> {
        match self {
            FittedPipeline::Single(p) => p.predict_label(instance, store),
            FittedPipeline::Cascade(c) => c.predict_label(instance, store),
        }
    }
}
