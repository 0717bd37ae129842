//! Boosting residuals against central finite differences of the loss.

use humour_styles_core::classifiers::{gbt_fit_traced, GradientBoostingParams};
use humour_styles_core::rng::DeterministicRng;

/// Per-sample multiclass cross-entropy written out directly.
fn loss(scores: &[f64], label: usize) -> f64 {
    let z: f64 = scores.iter().map(|s| s.exp()).sum();
    -(scores[label].exp() / z).ln()
}

fn finite_difference(scores: &[f64], label: usize, k: usize) -> f64 {
    let h = 1e-5;
    let mut up = scores.to_vec();
    let mut down = scores.to_vec();
    up[k] += h;
    down[k] -= h;
    (loss(&up, label) - loss(&down, label)) / (2.0 * h)
}

fn problem() -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = DeterministicRng::new(42);
    let mut unit = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let rows: Vec<Vec<f64>> = (0..10).map(|_| vec![unit() * 4.0, unit() * 4.0, unit()]).collect();
    let labels = vec![0, 1, 2, 0, 1, 2, 0, 1, 2, 1];
    (rows, labels)
}

#[test]
fn residuals_are_negative_gradients() {
    let (data, labels) = problem();
    let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
    let params = GradientBoostingParams { n_rounds: 50, max_depth: 2, ..Default::default() };
    let (_, trace) = gbt_fit_traced(&rows, &labels, 3, params).unwrap();
    assert_eq!(trace.scores.len(), 50);
    let mut worst: f64 = 0.0;
    for (round, (scores, residuals)) in trace.scores.iter().zip(&trace.residuals).enumerate() {
        let mut diff = 0.0;
        let mut norm = 0.0;
        for i in 0..rows.len() {
            for k in 0..3 {
                let numeric = -finite_difference(&scores[i], labels[i], k);
                diff += (residuals[i][k] - numeric).powi(2);
                norm += numeric.powi(2);
            }
        }
        let relative = (diff / norm).sqrt();
        assert!(relative <= 1e-4, "round {round}: relative error {relative}");
        worst = worst.max(relative);
    }
    assert!(worst > 0.0);
}

#[test]
fn training_loss_never_increases() {
    let (data, labels) = problem();
    let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
    let (_, trace) = gbt_fit_traced(&rows, &labels, 3, GradientBoostingParams { n_rounds: 50, ..Default::default() }).unwrap();
    assert_eq!(trace.losses.len(), 51);
    assert!((trace.losses[0] - 3f64.ln()).abs() < 1e-12);
    for (r, w) in trace.losses.windows(2).enumerate() {
        assert!(w[1] <= w[0], "loss rose after round {r}: {} -> {}", w[0], w[1]);
    }
}

#[test]
fn traced_scores_match_recomputed_loss() {
    let (data, labels) = problem();
    let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
    let (_, trace) = gbt_fit_traced(&rows, &labels, 3, GradientBoostingParams { n_rounds: 5, ..Default::default() }).unwrap();
    for (r, scores) in trace.scores.iter().enumerate() {
        let mean: f64 = scores.iter().zip(&labels).map(|(s, &y)| loss(s, y)).sum::<f64>() / 10.0;
        assert!((mean - trace.losses[r]).abs() < 1e-12);
    }
}
