use std::path::Path;

use humour_styles::core::corpus::{Corpus, HumourLabel, Instance};
use humour_styles::core::features::EmbeddingMatrix;
use humour_styles::dataset::{parse_corpus, write_csv, write_jsonl, DataFormat};
use humour_styles::embeddings::{format_embeddings, parse_embeddings};
use proptest::prelude::*;

fn corpus_strategy() -> impl Strategy<Value = Corpus> {
    let text = "[a-zA-Z0-9 ,.'\"!?\u{2019}é-]{0,40}[a-z]";
    let record = (text, proptest::option::of(0u8..5), proptest::option::of("[a-z]{1,6}"));
    proptest::collection::vec(record, 1..15).prop_map(|rows| {
        let instances = rows
            .into_iter()
            .enumerate()
            .map(|(i, (text, label, source))| {
                let label = label.map(|l| HumourLabel::try_from(l).unwrap());
                let mut instance = Instance::new(format!("r{i}"), text, label);
                instance.source = source;
                instance
            })
            .collect();
        Corpus::new(instances).unwrap()
    })
}

proptest! {
    #[test]
    fn jsonl_round_trip(corpus in corpus_strategy()) {
        let mut buf = Vec::new();
        write_jsonl(&corpus, &mut buf).unwrap();
        let back = parse_corpus(Path::new("x.jsonl"), std::str::from_utf8(&buf).unwrap(), DataFormat::Jsonl).unwrap();
        prop_assert_eq!(back, corpus);
    }

    #[test]
    fn csv_round_trip(corpus in corpus_strategy()) {
        let mut buf = Vec::new();
        write_csv(&corpus, &mut buf).unwrap();
        let back = parse_corpus(Path::new("x.csv"), std::str::from_utf8(&buf).unwrap(), DataFormat::Csv).unwrap();
        prop_assert_eq!(back, corpus);
    }

    #[test]
    fn embv1_round_trip(
        dim in 1usize..6,
        rows in proptest::collection::vec(proptest::collection::vec(-1e6f64..1e6, 6), 0..12),
    ) {
        let mut m = EmbeddingMatrix::new("gte", dim);
        for (i, row) in rows.iter().enumerate() {
            m.push(format!("id {i}"), row[..dim].to_vec()).unwrap();
        }
        let back = parse_embeddings(Path::new("x.embv1"), &format_embeddings(&m)).unwrap();
        prop_assert_eq!(back.len(), m.len());
        prop_assert_eq!(back.dim(), dim);
        for ((a_id, a), (b_id, b)) in m.iter().zip(back.iter()) {
            prop_assert_eq!(a_id, b_id);
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() <= 1e-6);
            }
        }
    }
}
