//! Paired comparison of single-model and cascade results across models.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::metrics::MetricBundle;
use super::wilcoxon::{wilcoxon_signed_rank, WilcoxonTest};
use crate::corpus::HumourLabel;
use crate::error::{Error, Result};

/// One metric compared across aligned model pairs `(single, two_model)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub metric: String,
    pub models: Vec<String>,
    pub pairs: Vec<(f64, f64)>,
    pub mean_single: f64,
    pub mean_two: f64,
    /// `mean_two - mean_single`.
    pub mean_difference: f64,
    /// Pairs where the two-model value is strictly higher.
    pub improved: usize,
    /// `Err` carries why the test is not applicable.
    pub test: core::result::Result<WilcoxonTest, String>,
}

impl PairedComparison {
    pub fn new(metric: impl Into<String>, models: Vec<String>, pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = pairs.len() as f64;
        let mean_single = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_two = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let improved = pairs.iter().filter(|(a, b)| b > a).count();
        let test = wilcoxon_signed_rank(&pairs).map_err(|e| e.to_string());
        Ok(Self {
            metric: metric.into(),
            models,
            pairs,
            mean_single,
            mean_two,
            mean_difference: mean_two - mean_single,
            improved,
            test,
        })
    }
}

/// Metric rows compared: macro precision, recall, F1, accuracy, then the F1
/// of each of the five classes.
pub fn comparison_metrics() -> Vec<(String, fn(&MetricBundle, usize) -> f64, usize)> {
    let mut rows: Vec<(String, fn(&MetricBundle, usize) -> f64, usize)> = alloc::vec![
        ("precision".to_string(), |b, _| b.precision, 0),
        ("recall".to_string(), |b, _| b.recall, 0),
        ("f1".to_string(), |b, _| b.f1, 0),
        ("accuracy".to_string(), |b, _| b.accuracy, 0),
    ];
    for label in HumourLabel::ALL {
        rows.push((label.name().to_string(), |b, c| b.per_class[c].f1, label.index()));
    }
    rows
}

/// Aligns the two lists by model name (same order required) and runs one
/// paired comparison per metric.
pub fn compare_approaches(
    single: &[(String, MetricBundle)],
    two: &[(String, MetricBundle)],
) -> Result<Vec<PairedComparison>> {
    if single.len() != two.len() {
        return Err(Error::Misaligned(format!(
            "{} single-model results vs {} two-model results",
            single.len(),
            two.len()
        )));
    }
    if single.is_empty() {
        return Err(Error::EmptyInput);
    }
    for ((a, ba), (b, bb)) in single.iter().zip(two) {
        if a != b {
            return Err(Error::Misaligned(format!("model {a:?} paired with {b:?}")));
        }
        if ba.per_class.len() != HumourLabel::COUNT || bb.per_class.len() != HumourLabel::COUNT {
            return Err(Error::Misaligned(format!("model {a:?} is not a five-class result")));
        }
    }
    let models: Vec<String> = single.iter().map(|(m, _)| m.clone()).collect();
    comparison_metrics()
        .into_iter()
        .map(|(name, get, class)| {
            let pairs = single
                .iter()
                .zip(two)
                .map(|((_, a), (_, b))| (get(a, class), get(b, class)))
                .collect();
            PairedComparison::new(name, models.clone(), pairs)
        })
        .collect()
}
