//! Wilcoxon signed-rank test for paired samples.
//!
//! Differences are `b - a`. Zero differences are dropped and `n` shrinks
//! accordingly; tied magnitudes share their average rank. For `n <= 25` the
//! two-sided p-value is exact, `min(1, 2 P(T <= W))` with `T` the positive
//! rank sum under random signs, counted by a subset-sum table over doubled
//! ranks. Larger samples use the normal approximation with tie correction.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` handled by the exact distribution.
pub const EXACT_MAX_N: usize = 25;
/// Smallest number of non-zero differences accepted.
pub const MIN_DIFFERENCES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonTest {
    /// Non-zero differences used.
    pub n: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    /// `min(w_plus, w_minus)`.
    pub w: f64,
    pub p_value: f64,
    pub method: PValueMethod,
}

/// Average ranks (1-based) of `values`, ties sharing the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Number of sign assignments whose doubled positive-rank sum is at most
/// `limit`, out of `2^n`.
fn lower_tail_count(doubled_ranks: &[u64], limit: u64) -> u64 {
    let total: u64 = doubled_ranks.iter().sum();
    let mut ways = vec![0u64; total as usize + 1];
    ways[0] = 1;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        reach += r;
        for s in (r..=reach).rev() {
            ways[s] += ways[s - r];
        }
    }
    ways.iter().take(limit.min(total) as usize + 1).sum()
}

pub fn wilcoxon_signed_rank(pairs: &[(f64, f64)]) -> Result<WilcoxonTest> {
    let diffs: Vec<f64> = pairs.iter().map(|&(a, b)| b - a).filter(|d| *d != 0.0).collect();
    if let Some(i) = diffs.iter().position(|d| !d.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let n = diffs.len();
    if n < MIN_DIFFERENCES {
        return Err(Error::TooFewDifferences(n));
    }
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let w_plus: f64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).fold(0.0, |acc, (r, _)| acc + r);
    let w_minus: f64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d < 0.0).fold(0.0, |acc, (r, _)| acc + r);
    let w = w_plus.min(w_minus);

    let (p, method) = if n <= EXACT_MAX_N {
        let doubled: Vec<u64> = ranks.iter().map(|r| (r * 2.0) as u64).collect();
        let count = lower_tail_count(&doubled, (w * 2.0) as u64);
        let p = 2.0 * count as f64 / libm::pow(2.0, n as f64);
        (p, PValueMethod::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = tie_sizes(&magnitudes).map(|t| t * t * t - t).sum::<f64>() / 48.0;
        let variance = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        let z = (w - mean) / libm::sqrt(variance);
        (libm::erfc(z.abs() / core::f64::consts::SQRT_2), PValueMethod::Normal)
    };
    Ok(WilcoxonTest {
        n,
        w_plus,
        w_minus,
        w,
        p_value: p.min(1.0),
        method,
    })
}

fn tie_sizes(values: &[f64]) -> impl Iterator<Item = f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sizes = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let end = start + sorted[start..].iter().take_while(|v| **v == sorted[start]).count();
        sizes.push((end - start) as f64);
        start = end;
    }
    sizes.into_iter()
}
