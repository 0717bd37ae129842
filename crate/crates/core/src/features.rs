//! Text and embedding features.
//!
//! Naive Bayes consumes sparse unigram counts over a vocabulary fitted on the
//! training corpus only. Tree ensembles consume dense sentence-embedding rows,
//! which arrive as opaque vectors keyed by instance id and model name.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Instance};
use crate::error::{Error, Result};

/// Lowercasing word tokenizer.
///
/// Splits on every character that is not alphanumeric, except an apostrophe
/// with alphanumerics on both sides (`don't` stays one token). The
/// typographic apostrophe U+2019 is treated as `'`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tokenizer;

impl Tokenizer {
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let chars: Vec<char> = text
            .chars()
            .map(|c| if c == '\u{2019}' { '\'' } else { c })
            .collect();
        let mut tokens = Vec::new();
        let mut current = String::new();
        for (i, &c) in chars.iter().enumerate() {
            if c.is_alphanumeric() {
                current.extend(c.to_lowercase());
            } else if c == '\''
                && !current.is_empty()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
            {
                current.push('\'');
            } else if !current.is_empty() {
                tokens.push(core::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
        tokens
    }
}

/// Token → dense index map, indices assigned in first-seen order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "VocabularyTokens")]
pub struct Vocabulary {
    tokens: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, u32>,
}

#[derive(Deserialize)]
struct VocabularyTokens {
    tokens: Vec<String>,
}

impl From<VocabularyTokens> for Vocabulary {
    fn from(v: VocabularyTokens) -> Self {
        Vocabulary::from_tokens(v.tokens)
    }
}

impl Vocabulary {
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let mut vocab = Vocabulary::default();
        for token in tokens {
            vocab.insert(token);
        }
        vocab
    }

    fn insert(&mut self, token: String) {
        if !self.index.contains_key(&token) {
            self.index.insert(token.clone(), self.tokens.len() as u32);
            self.tokens.push(token);
        }
    }

    /// Rebuilds the lookup table; needed after deserialization.
    pub fn reindex(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: u32) -> Option<&str> {
        self.tokens.get(index as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Builds the vocabulary from the training corpus alone.
pub fn fit_vocabulary(train: &Corpus) -> Result<Vocabulary> {
    if train.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let tokenizer = Tokenizer;
    let mut vocab = Vocabulary::default();
    for instance in train.instances() {
        for token in tokenizer.tokenize(&instance.text) {
            vocab.insert(token);
        }
    }
    if vocab.is_empty() {
        return Err(Error::NoTokens);
    }
    Ok(vocab)
}

/// Sparse token counts, sorted by index; every stored count is ≥ 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    entries: Vec<(u32, u32)>,
}

impl CountVector {
    /// From `(index, count)` pairs in any order; zero counts are dropped and
    /// repeated indices are summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (i, c) in pairs {
            if c > 0 {
                *map.entry(i).or_insert(0u32) += c;
            }
        }
        Self {
            entries: map.into_iter().collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    pub fn get(&self, index: u32) -> u32 {
        self.entries
            .binary_search_by_key(&index, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }
}

/// Counts in-vocabulary tokens of `text`; unknown tokens are dropped.
pub fn vectorize(text: &str, vocab: &Vocabulary) -> CountVector {
    CountVector::from_pairs(
        Tokenizer
            .tokenize(text)
            .iter()
            .filter_map(|t| vocab.get(t))
            .map(|i| (i, 1)),
    )
}

/// Dense vectors of one embedding model, keyed by instance id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    model_name: String,
    dim: usize,
    ids: Vec<String>,
    rows: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingMatrix {
    pub fn new(model_name: impl Into<String>, dim: usize) -> Self {
        Self {
            model_name: model_name.into(),
            dim,
            ids: Vec::new(),
            rows: BTreeMap::new(),
        }
    }

    /// Appends a row, checking its length, finiteness and id uniqueness.
    /// Row numbers in errors are 1-based insertion positions.
    pub fn push(&mut self, id: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let id = id.into();
        let row = self.ids.len() + 1;
        if vector.len() != self.dim {
            return Err(Error::DimMismatch {
                row,
                expected: self.dim,
                found: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(row));
        }
        if self.rows.contains_key(&id) {
            return Err(Error::DuplicateId(id));
        }
        self.ids.push(id.clone());
        self.rows.insert(id, vector);
        Ok(())
    }

    pub fn model_name(&self) -> &str {
        &self.model_name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f64]> {
        self.rows.get(id).map(Vec::as_slice)
    }

    /// Rows in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.ids
            .iter()
            .map(move |id| (id.as_str(), self.rows[id].as_slice()))
    }
}

/// Embedding matrices for several models, keyed by lowercase model name.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingStore {
    models: BTreeMap<String, EmbeddingMatrix>,
}

impl EmbeddingStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, matrix: EmbeddingMatrix) {
        self.models
            .insert(matrix.model_name().to_lowercase(), matrix);
    }

    pub fn model(&self, name: &str) -> Option<&EmbeddingMatrix> {
        self.models.get(&name.to_lowercase())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.model(name).is_some()
    }
}

/// Which representation a pipeline stage consumes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSpec {
    /// Unigram counts for naive Bayes.
    Counts,
    /// Dense vectors from the named embedding model.
    Embedding(String),
}

impl FeatureSpec {
    pub fn name(&self) -> String {
        match self {
            FeatureSpec::Counts => "counts".to_string(),
            FeatureSpec::Embedding(model) => model.to_lowercase(),
        }
    }
}

/// A single instance's features, in the form a classifier consumes.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureRow {
    Counts(CountVector),
    Dense(Vec<f64>),
}

/// Feature extraction state fitted on a training corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FittedFeatures {
    Counts(Vocabulary),
    Embedding { model: String, dim: usize },
}

impl FittedFeatures {
    pub fn fit(spec: &FeatureSpec, train: &Corpus, store: &EmbeddingStore) -> Result<Self> {
        match spec {
            FeatureSpec::Counts => fit_vocabulary(train).map(FittedFeatures::Counts),
            FeatureSpec::Embedding(model) => {
                let matrix = store.model(model).ok_or_else(|| Error::MissingFeature {
                    kind: model.clone(),
                    id: train
                        .instances()
                        .first()
                        .map(|i| i.id.clone())
                        .unwrap_or_default(),
                })?;
                Ok(FittedFeatures::Embedding {
                    model: model.to_lowercase(),
                    dim: matrix.dim(),
                })
            }
        }
    }

    pub fn spec(&self) -> FeatureSpec {
        match self {
            FittedFeatures::Counts(_) => FeatureSpec::Counts,
            FittedFeatures::Embedding { model, .. } => FeatureSpec::Embedding(model.clone()),
        }
    }

    /// Restores derived lookup state after deserialization.
    pub fn reindex(&mut self) {
        if let FittedFeatures::Counts(vocab) = self {
            vocab.reindex();
        }
    }

    pub fn extract(&self, instance: &Instance, store: &EmbeddingStore) -> Result<FeatureRow> {
        match self {
            FittedFeatures::Counts(vocab) => Ok(FeatureRow::Counts(vectorize(&instance.text, vocab))),
            FittedFeatures::Embedding { model, dim } => {
                let missing = || Error::MissingFeature {
                    kind: model.clone(),
                    id: instance.id.clone(),
                };
                let row = store.model(model).ok_or_else(missing)?.get(&instance.id).ok_or_else(missing)?;
                if row.len() != *dim {
                    return Err(Error::DimMismatch {
                        row: 0,
                        expected: *dim,
                        found: row.len(),
                    });
                }
                Ok(FeatureRow::Dense(row.to_vec()))
            }
        }
    }
}
