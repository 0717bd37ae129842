//! JSON artifacts for trained models and pipeline bundles.
//!
//! A stage artifact looks like
//! `{"format_version":1,"kind":..,"hyperparams":..,"seed":..,"features":..,"payload":..}`.
//! A bundle wraps one artifact (single mode) or two (cascade mode).

use std::fs;
use std::path::Path;

use humour_styles_core::cascade::{CascadeModel, FittedPipeline, SingleModelPipeline, Stage2Training, StagePipeline, StageSpec};
use humour_styles_core::classifiers::{ClassifierSpec, TrainedModel};
use humour_styles_core::features::FittedFeatures;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub kind: String,
    pub hyperparams: Value,
    pub seed: u64,
    pub features: FittedFeatures,
    pub payload: Value,
}

/// Splits an adjacently tagged value `{"kind": k, <field>: v}` into `(k, v)`.
fn untag(value: Value, field: &str) -> Result<(String, Value)> {
    let Value::Object(mut map) = value else {
        return Err(Error::Config(format!("expected an object with `kind` and `{field}`")));
    };
    let kind = match map.remove("kind") {
        Some(Value::String(k)) => k,
        _ => return Err(Error::Config("missing `kind`".into())),
    };
    Ok((kind, map.remove(field).unwrap_or(Value::Null)))
}

impl ModelArtifact {
    pub fn from_stage(stage: &StagePipeline) -> Result<Self> {
        let (kind, hyperparams) = untag(serde_json::to_value(stage.spec.classifier)?, "hyperparams")?;
        let (_, payload) = untag(serde_json::to_value(&stage.model)?, "payload")?;
        Ok(Self {
            format_version: FORMAT_VERSION,
            kind,
            hyperparams,
            seed: stage.spec.classifier.seed(),
            features: stage.features.clone(),
            payload,
        })
    }

    pub fn into_stage(self) -> Result<StagePipeline> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported model format_version {}", self.format_version)));
        }
        let classifier: ClassifierSpec = serde_json::from_value(json!({"kind": self.kind, "hyperparams": self.hyperparams}))?;
        let model: TrainedModel = serde_json::from_value(json!({"kind": self.kind, "payload": self.payload}))?;
        let spec = StageSpec::new(self.features.spec(), classifier)?;
        let mut stage = StagePipeline {
            spec,
            features: self.features,
            model,
        };
        stage.prepare()?;
        Ok(stage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BundleBody {
    Single {
        model: ModelArtifact,
    },
    Cascade {
        stage1: ModelArtifact,
        stage2: ModelArtifact,
        stage2_training: Stage2Training,
    },
}

/// A trained pipeline as written to `model.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineBundle {
    pub format_version: u32,
    /// Model name used in reports.
    pub name: String,
    #[serde(flatten)]
    pub body: BundleBody,
}

impl PipelineBundle {
    pub fn new(name: impl Into<String>, pipeline: &FittedPipeline, stage2_training: Stage2Training) -> Result<Self> {
        let body = match pipeline {
            FittedPipeline::Single(p) => BundleBody::Single {
                model: ModelArtifact::from_stage(&p.stage)?,
            },
            FittedPipeline::Cascade(c) => BundleBody::Cascade {
                stage1: ModelArtifact::from_stage(&c.stage1)?,
                stage2: ModelArtifact::from_stage(&c.stage2)?,
                stage2_training,
            },
        };
        Ok(Self {
            format_version: FORMAT_VERSION,
            name: name.into(),
            body,
        })
    }

    pub fn into_pipeline(self) -> Result<FittedPipeline> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported bundle format_version {}", self.format_version)));
        }
        let mut pipeline = match self.body {
            BundleBody::Single { model } => FittedPipeline::Single(SingleModelPipeline { stage: model.into_stage()? }),
            BundleBody::Cascade { stage1, stage2, .. } => {
                FittedPipeline::Cascade(CascadeModel::new(stage1.into_stage()?, stage2.into_stage()?)?)
            }
        };
        pipeline.prepare()?;
        Ok(pipeline)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.into(),
            message: e.to_string(),
        })
    }
}
