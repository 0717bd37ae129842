//! Multinomial naive Bayes against a direct Bayes-rule computation.
//!
//! The oracle works on raw token-index documents and multiplies plain
//! probabilities (no logs, no sparse vectors), so it shares no code with the
//! fitted model beyond the input data.

use humour_styles_core::classifiers::{nb_fit, nb_predict_proba};
use humour_styles_core::features::CountVector;
use humour_styles_core::rng::DeterministicRng;
use proptest::prelude::*;

struct Synthetic {
    docs: Vec<Vec<usize>>,
    labels: Vec<usize>,
    n_classes: usize,
    vocab: usize,
}

fn synthetic(seed: u64) -> Synthetic {
    let mut rng = DeterministicRng::new(seed);
    let n_classes = 2 + rng.below(4);
    let vocab = 1 + rng.below(10);
    let n_docs = 1 + rng.below(20);
    let mut docs = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n_docs {
        let len = rng.below(8);
        docs.push((0..len).map(|_| rng.below(vocab)).collect());
        labels.push(rng.below(n_classes));
    }
    Synthetic { docs, labels, n_classes, vocab }
}

fn counts(doc: &[usize]) -> CountVector {
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for &t in doc {
        match pairs.iter_mut().find(|(i, _)| *i == t as u32) {
            Some(p) => p.1 += 1,
            None => pairs.push((t as u32, 1)),
        }
    }
    CountVector::from_pairs(pairs)
}

/// P(c | doc) = P(c) * prod_t P(t | c) / sum over classes, with
/// P(t | c) = (n_tc + 1) / (n_c + V).
fn oracle(s: &Synthetic, doc: &[usize]) -> Vec<f64> {
    let mut joint = vec![0.0; s.n_classes];
    for c in 0..s.n_classes {
        let members: Vec<&Vec<usize>> = s.docs.iter().zip(&s.labels).filter(|(_, &l)| l == c).map(|(d, _)| d).collect();
        if members.is_empty() {
            continue;
        }
        let total: usize = members.iter().map(|d| d.len()).sum();
        let mut p = members.len() as f64 / s.docs.len() as f64;
        for &t in doc {
            let n_tc = members.iter().map(|d| d.iter().filter(|&&x| x == t).count()).sum::<usize>();
            p *= (n_tc as f64 + 1.0) / (total as f64 + s.vocab as f64);
        }
        joint[c] = p;
    }
    let z: f64 = joint.iter().sum();
    joint.iter().map(|p| p / z).collect()
}

fn check(seed: u64) {
    let s = synthetic(seed);
    let train: Vec<(CountVector, usize)> = s.docs.iter().map(|d| counts(d)).zip(s.labels.iter().copied()).collect();
    let model = nb_fit(&train, s.n_classes, s.vocab, 1.0).unwrap();
    let mut queries = s.docs.clone();
    let mut rng = DeterministicRng::new(seed ^ 0xabcd);
    for _ in 0..5 {
        let len = rng.below(10);
        queries.push((0..len).map(|_| rng.below(s.vocab)).collect());
    }
    for q in &queries {
        let got = nb_predict_proba(&model, &counts(q));
        let want = oracle(&s, q);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-9, "seed {seed}: {got:?} vs {want:?}");
        }
        assert!((got.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn twenty_five_random_corpora() {
    for seed in 0..25 {
        check(seed);
    }
}

proptest! {
    #[test]
    fn matches_oracle_for_any_seed(seed in any::<u64>()) {
        check(seed);
    }

    #[test]
    fn scaling_exclusive_evidence_keeps_prediction(k in 1u32..6, a in 1u32..5, b in 1u32..5) {
        // Class 0 uses token 0 only, class 1 token 1 only; a shared token 2
        // appears in both.
        let base = [(CountVector::from_pairs([(0, a), (2, 1)]), 0), (CountVector::from_pairs([(1, b), (2, 1)]), 1)];
        let scaled = [(CountVector::from_pairs([(0, a * k), (2, k)]), 0), base[1].clone()];
        for train in [&base, &scaled] {
            let model = nb_fit(train, 2, 3, 1.0).unwrap();
            for (x, label) in train.iter() {
                let p = nb_predict_proba(&model, x);
                prop_assert!(p[*label] > p[1 - label]);
            }
        }
    }
}
