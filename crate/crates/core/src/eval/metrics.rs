//! Confusion matrices and the metric bundle derived from them.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::HumourLabel;
use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(class_names: Vec<String>) -> Self {
        let k = class_names.len();
        Self {
            class_names,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn col_sum(&self, class: usize) -> u64 {
        self.counts.iter().map(|r| r[class]).sum()
    }

    /// Element-wise sum; class names must agree.
    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.class_names != other.class_names {
            return Err(Error::Misaligned("confusion matrices have different classes".to_string()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }
}

fn default_names(k: usize) -> Vec<String> {
    (0..k).map(|i| i.to_string()).collect()
}

/// Tallies `(true, predicted)` pairs over `n_classes` classes named `0..k`.
pub fn confusion(truth: &[usize], predicted: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    confusion_named(truth, predicted, default_names(n_classes))
}

pub fn confusion_named(truth: &[usize], predicted: &[usize], class_names: Vec<String>) -> Result<ConfusionMatrix> {
    if truth.len() != predicted.len() {
        return Err(Error::LengthMismatch(truth.len(), predicted.len()));
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut cm = ConfusionMatrix::zeros(class_names);
    let k = cm.n_classes();
    for (&t, &p) in truth.iter().zip(predicted) {
        if let Some(label) = [t, p].into_iter().find(|&l| l >= k) {
            return Err(Error::LabelOutOfRange { label, n_classes: k });
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

/// Five-class confusion matrix with label names.
pub fn confusion_five(truth: &[HumourLabel], predicted: &[HumourLabel]) -> Result<ConfusionMatrix> {
    let t: Vec<usize> = truth.iter().map(|l| l.index()).collect();
    let p: Vec<usize> = predicted.iter().map(|l| l.index()).collect();
    confusion_named(&t, &p, HumourLabel::ALL.iter().map(|l| l.name().to_string()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub name: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Accuracy plus macro and per-class precision, recall and F1, all in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBundle {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_class: Vec<ClassMetrics>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<MetricBundle> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyInput);
    }
    let per_class: Vec<ClassMetrics> = (0..cm.n_classes())
        .map(|c| {
            let precision = ratio(cm.counts[c][c], cm.col_sum(c));
            let recall = ratio(cm.counts[c][c], cm.row_sum(c));
            ClassMetrics {
                name: cm.class_names[c].clone(),
                precision,
                recall,
                f1: harmonic_mean(precision, recall),
                support: cm.row_sum(c),
            }
        })
        .collect();
    let k = per_class.len() as f64;
    let macro_of = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k;
    Ok(MetricBundle {
        accuracy: ratio(cm.trace(), total),
        precision: macro_of(|m| m.precision),
        recall: macro_of(|m| m.recall),
        f1: macro_of(|m| m.f1),
        per_class,
    })
}

impl MetricBundle {
    /// Field-wise arithmetic mean; supports are summed.
    pub fn mean(bundles: &[MetricBundle]) -> Result<MetricBundle> {
        let first = bundles.first().ok_or(Error::EmptyInput)?;
        if bundles.iter().any(|b| b.per_class.len() != first.per_class.len()) {
            return Err(Error::Misaligned("bundles have different class counts".to_string()));
        }
        let n = bundles.len() as f64;
        let avg = |f: &dyn Fn(&MetricBundle) -> f64| bundles.iter().map(f).sum::<f64>() / n;
        let per_class = first
            .per_class
            .iter()
            .enumerate()
            .map(|(c, m)| ClassMetrics {
                name: m.name.clone(),
                precision: avg(&|b| b.per_class[c].precision),
                recall: avg(&|b| b.per_class[c].recall),
                f1: avg(&|b| b.per_class[c].f1),
                support: bundles.iter().map(|b| b.per_class[c].support).sum(),
            })
            .collect();
        Ok(MetricBundle {
            accuracy: avg(&|b| b.accuracy),
            precision: avg(&|b| b.precision),
            recall: avg(&|b| b.recall),
            f1: avg(&|b| b.f1),
            per_class,
        })
    }

    /// `(name, value)` pairs in report order: the four headline metrics,
    /// then per-class precision, recall and F1.
    pub fn flatten(&self) -> Vec<(String, f64)> {
        let mut out = vec![
            ("accuracy".to_string(), self.accuracy),
            ("macro_precision".to_string(), self.precision),
            ("macro_recall".to_string(), self.recall),
            ("macro_f1".to_string(), self.f1),
        ];
        for m in &self.per_class {
            out.push((alloc::format!("{}_precision", m.name), m.precision));
            out.push((alloc::format!("{}_recall", m.name), m.recall));
            out.push((alloc::format!("{}_f1", m.name), m.f1));
        }
        out
    }
}

/// Percentage with one decimal, as used in report tables.
pub fn percent(value: f64) -> String {
    alloc::format!("{:.1}", value * 100.0)
}
