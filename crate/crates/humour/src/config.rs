//! Run configuration: the JSON file behind `--config` and the `run.json`
//! written next to every trained bundle.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use humour_styles_core::cascade::{PipelineSpec, Stage2Training, StageSpec};
use humour_styles_core::corpus::{Corpus, SplitSpec};
use humour_styles_core::features::{EmbeddingMatrix, EmbeddingStore};
use serde::{Deserialize, Deserializer, Serialize};

use crate::dataset::{read_corpus, DataFormat};
use crate::embeddings::{fetch_embeddings, load_embeddings, EmbedClient, EmbeddingProvider};
use crate::error::{Error, Result};

pub const EMBED_URL_ENV: &str = "HUMOUR_EMBED_URL";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<DataFormat>,
    #[serde(default)]
    pub split: SplitSpec,
    /// Stages may be written in full or as `"mul:gbt"` shorthand.
    #[serde(deserialize_with = "pipeline_spec")]
    pub pipeline: PipelineSpec,
    #[serde(default)]
    pub embeddings: BTreeMap<String, EmbeddingProvider>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Report name; defaults to the pipeline's display name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StageRepr {
    Short(String),
    Full(StageSpec),
}

impl StageRepr {
    fn resolve<E: serde::de::Error>(self) -> std::result::Result<StageSpec, E> {
        match self {
            StageRepr::Short(s) => s.parse().map_err(E::custom),
            StageRepr::Full(spec) => StageSpec::new(spec.features, spec.classifier).map_err(E::custom),
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
enum PipelineRepr {
    Single {
        spec: StageRepr,
    },
    Cascade {
        stage1: StageRepr,
        stage2: StageRepr,
        #[serde(default)]
        stage2_training: Stage2Training,
    },
}

fn pipeline_spec<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<PipelineSpec, D::Error> {
    Ok(match PipelineRepr::deserialize(d)? {
        PipelineRepr::Single { spec } => PipelineSpec::Single { spec: spec.resolve()? },
        PipelineRepr::Cascade {
            stage1,
            stage2,
            stage2_training,
        } => PipelineSpec::Cascade {
            stage1: stage1.resolve()?,
            stage2: stage2.resolve()?,
            stage2_training,
        },
    })
}

impl RunConfig {
    pub fn new(dataset: PathBuf, pipeline: PipelineSpec) -> Self {
        Self {
            dataset,
            format: None,
            split: SplitSpec::default(),
            pipeline,
            embeddings: BTreeMap::new(),
            output_dir: default_output_dir(),
            name: None,
        }
    }

    /// Reads a config; relative paths are taken relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.into(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.rebase(base);
        config.split.validate()?;
        Ok(config)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    fn rebase(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut self.dataset);
        join(&mut self.output_dir);
        for provider in self.embeddings.values_mut() {
            if let EmbeddingProvider::File { path } = provider {
                join(path);
            }
        }
    }

    /// Turns every path absolute so the config can be stored anywhere.
    pub fn absolutize(&mut self) -> Result<()> {
        let cwd = std::env::current_dir().map_err(|e| Error::io(Path::new("."), e))?;
        self.rebase(&cwd);
        Ok(())
    }

    /// The pipeline with every learner seeded from `split.seed`.
    pub fn seeded_pipeline(&self) -> PipelineSpec {
        self.pipeline.clone().with_seed(self.split.seed)
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.pipeline.default_name())
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        read_corpus(&self.dataset, self.format)
    }

    /// Loads or fetches every embedding model the pipeline reads.
    pub fn load_store(&self, corpus: &Corpus) -> Result<EmbeddingStore> {
        let mut store = EmbeddingStore::new();
        for model in self.pipeline.embedding_models() {
            let provider = self
                .embeddings
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(&model))
                .map(|(_, p)| p)
                .ok_or_else(|| Error::Config(format!("no embedding provider configured for model {model:?}")))?;
            let mut matrix = match provider {
                EmbeddingProvider::File { path } => load_embeddings(path)?,
                EmbeddingProvider::Http { url } => {
                    let url = std::env::var(EMBED_URL_ENV).unwrap_or_else(|_| url.clone());
                    let items: Vec<(String, String)> =
                        corpus.instances().iter().map(|i| (i.id.clone(), i.text.clone())).collect();
                    fetch_embeddings(&EmbedClient::new(&url), &model, &items)?
                }
            };
            if !matrix.model_name().eq_ignore_ascii_case(&model) {
                matrix = rename(matrix, &model)?;
            }
            store.insert(matrix);
        }
        Ok(store)
    }
}

/// Files are keyed by the config's model name, whatever their header says.
fn rename(matrix: EmbeddingMatrix, model: &str) -> Result<EmbeddingMatrix> {
    let mut out = EmbeddingMatrix::new(model, matrix.dim());
    for (id, row) in matrix.iter() {
        out.push(id, row.to_vec())?;
    }
    Ok(out)
}

/// Parses `model=path` or `model=http://...` from the command line.
pub fn parse_provider(arg: &str) -> std::result::Result<(String, EmbeddingProvider), String> {
    let (model, target) = arg
        .split_once('=')
        .ok_or_else(|| format!("expected MODEL=PATH or MODEL=URL, got {arg:?}"))?;
    let provider = if target.starts_with("http://") || target.starts_with("https://") {
        EmbeddingProvider::Http { url: target.into() }
    } else {
        EmbeddingProvider::File { path: target.into() }
    };
    Ok((model.trim().to_lowercase(), provider))
}
