//! Multinomial naive Bayes over unigram counts with additive smoothing.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::softmax_in_place;
use crate::error::{Error, Result};
use crate::features::CountVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub n_classes: usize,
    pub vocab_size: usize,
    pub alpha: f64,
    /// `ln P(class)`; `-inf` (serialized as null) for classes absent in training.
    #[serde(with = "neg_inf_as_null")]
    pub log_prior: Vec<f64>,
    /// `ln P(token | class)`, one row per class.
    pub log_likelihood: Vec<Vec<f64>>,
}

/// Fits class priors and per-class token likelihoods
/// `(count + alpha) / (total + alpha * V)`.
pub fn nb_fit(
    train: &[(CountVector, usize)],
    n_classes: usize,
    vocab_size: usize,
    alpha: f64,
) -> Result<NaiveBayesModel> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidHyperparameter("alpha must be positive"));
    }
    if vocab_size == 0 {
        return Err(Error::NoTokens);
    }
    let mut docs = vec![0u64; n_classes];
    let mut counts = vec![vec![0u64; vocab_size]; n_classes];
    for (x, label) in train {
        if *label >= n_classes {
            return Err(Error::LabelOutOfRange {
                label: *label,
                n_classes,
            });
        }
        docs[*label] += 1;
        for &(index, count) in x.entries() {
            let slot = counts[*label]
                .get_mut(index as usize)
                .ok_or(Error::InvalidHyperparameter("count index outside vocabulary"))?;
            *slot += count as u64;
        }
    }
    let n_docs = train.len() as f64;
    let log_prior = docs
        .iter()
        .map(|&d| if d == 0 { f64::NEG_INFINITY } else { libm::log(d as f64 / n_docs) })
        .collect();
    let log_likelihood = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            let denominator = total as f64 + alpha * vocab_size as f64;
            row.iter()
                .map(|&c| libm::log((c as f64 + alpha) / denominator))
                .collect()
        })
        .collect();
    Ok(NaiveBayesModel {
        n_classes,
        vocab_size,
        alpha,
        log_prior,
        log_likelihood,
    })
}

impl NaiveBayesModel {
    /// Unnormalized `ln P(class) + Σ count · ln P(token | class)`.
    pub fn joint_log_likelihood(&self, x: &CountVector) -> Vec<f64> {
        (0..self.n_classes)
            .map(|c| {
                if self.log_prior[c] == f64::NEG_INFINITY {
                    return f64::NEG_INFINITY;
                }
                self.log_prior[c]
                    + x.entries()
                        .iter()
                        .filter(|&&(i, _)| (i as usize) < self.vocab_size)
                        .map(|&(i, n)| n as f64 * self.log_likelihood[c][i as usize])
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn predict_proba(&self, x: &CountVector) -> Vec<f64> {
        let mut scores = self.joint_log_likelihood(x);
        softmax_in_place(&mut scores);
        scores
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.log_prior.len() == self.n_classes
            && self.log_likelihood.len() == self.n_classes
            && self.log_likelihood.iter().all(|r| r.len() == self.vocab_size);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidHyperparameter("naive Bayes tables have inconsistent shapes"))
        }
    }
}

/// Free-function form of [`NaiveBayesModel::predict_proba`].
pub fn nb_predict_proba(model: &NaiveBayesModel, x: &CountVector) -> Vec<f64> {
    model.predict_proba(x)
}

mod neg_inf_as_null {
    use alloc::vec::Vec;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(values: &[f64], serializer: S) -> Result<S::Ok, S::Error> {
        values
            .iter()
            .map(|v| v.is_finite().then_some(*v))
            .collect::<Vec<Option<f64>>>()
            .serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<f64>, D::Error> {
        Ok(Vec::<Option<f64>>::deserialize(deserializer)?
            .into_iter()
            .map(|v| v.unwrap_or(f64::NEG_INFINITY))
            .collect())
    }
}
