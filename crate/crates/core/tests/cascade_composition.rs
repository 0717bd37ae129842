use humour_styles_core::cascade::{CascadeModel, Stage};
use humour_styles_core::corpus::{remap_to_binary, remap_to_four_class, Corpus, HumourLabel, Instance};
use humour_styles_core::error::{Error, Result};
use humour_styles_core::features::EmbeddingStore;
use humour_styles_core::rng::DeterministicRng;
use std::cell::Cell;

/// Answers with the gold label after the four-class remap.
#[derive(Default)]
struct GoldFour {
    combined: Cell<usize>,
}

impl Stage for GoldFour {
    fn n_classes(&self) -> usize {
        4
    }

    fn predict_index(&self, i: &Instance, _: &EmbeddingStore) -> Result<usize> {
        let four = remap_to_four_class(i.label.ok_or_else(|| Error::Unlabeled(i.id.clone()))?);
        if four.index() == 2 {
            self.combined.set(self.combined.get() + 1);
        }
        Ok(four.index())
    }
}

/// Answers with the gold binary label.
struct GoldBinary;

impl Stage for GoldBinary {
    fn n_classes(&self) -> usize {
        2
    }

    fn predict_index(&self, i: &Instance, _: &EmbeddingStore) -> Result<usize> {
        Ok(remap_to_binary(i.label.ok_or_else(|| Error::Unlabeled(i.id.clone()))?)?.index())
    }
}

/// A stage two that must never be reached.
struct Broken;

impl Stage for Broken {
    fn n_classes(&self) -> usize {
        2
    }

    fn predict_index(&self, i: &Instance, _: &EmbeddingStore) -> Result<usize> {
        Err(Error::MissingFeature { kind: "stage two".into(), id: i.id.clone() })
    }
}

fn random_corpus(seed: u64, n: usize) -> Corpus {
    let mut rng = DeterministicRng::new(seed);
    Corpus::new(
        (0..n)
            .map(|i| Instance::new(format!("i{i}"), "text", Some(HumourLabel::ALL[rng.below(5)])))
            .collect(),
    )
    .unwrap()
}

#[test]
fn oracle_stages_reproduce_gold() {
    let store = EmbeddingStore::new();
    for seed in 0..5 {
        let corpus = random_corpus(seed, 300);
        let model = CascadeModel::new(GoldFour::default(), GoldBinary).unwrap();
        let (labels, calls) = model.predict_corpus(&corpus, &store).unwrap();
        assert_eq!(labels, corpus.gold_labels().unwrap());
        assert_eq!(calls, model.stage1.combined.get());
        let combined = corpus.count(HumourLabel::Affiliative) + corpus.count(HumourLabel::Aggressive);
        assert_eq!(calls, combined);
    }
}

#[test]
fn non_combined_predictions_ignore_stage_two() {
    let store = EmbeddingStore::new();
    let corpus = random_corpus(9, 200);
    let working = CascadeModel::new(GoldFour::default(), GoldBinary).unwrap();
    let broken = CascadeModel::new(GoldFour::default(), Broken).unwrap();
    for i in corpus.instances() {
        let a = working.cascade_predict(i, &store).unwrap();
        match broken.cascade_predict(i, &store) {
            Ok(b) => {
                assert!(!b.stage2_invoked);
                assert_eq!(a, b);
            }
            Err(e) => {
                assert!(a.stage2_invoked);
                assert!(matches!(e, Error::MissingFeature { .. }));
            }
        }
    }
}
