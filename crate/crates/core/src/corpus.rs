//! Label taxonomy, validated corpora and deterministic splitting.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Tokenizer;
use crate::rng::DeterministicRng;

/// The five-class label set. Codes are fixed: 0 self-enhancing,
/// 1 self-deprecating, 2 affiliative, 3 aggressive, 4 neutral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum HumourLabel {
    SelfEnhancing = 0,
    SelfDeprecating = 1,
    Affiliative = 2,
    Aggressive = 3,
    Neutral = 4,
}

impl HumourLabel {
    pub const ALL: [HumourLabel; 5] = [
        HumourLabel::SelfEnhancing,
        HumourLabel::SelfDeprecating,
        HumourLabel::Affiliative,
        HumourLabel::Aggressive,
        HumourLabel::Neutral,
    ];

    pub const COUNT: usize = 5;

    pub fn from_code(code: i64) -> Result<Self> {
        match code {
            0 => Ok(HumourLabel::SelfEnhancing),
            1 => Ok(HumourLabel::SelfDeprecating),
            2 => Ok(HumourLabel::Affiliative),
            3 => Ok(HumourLabel::Aggressive),
            4 => Ok(HumourLabel::Neutral),
            other => Err(Error::InvalidLabel(other)),
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            HumourLabel::SelfEnhancing => "self-enhancing",
            HumourLabel::SelfDeprecating => "self-deprecating",
            HumourLabel::Affiliative => "affiliative",
            HumourLabel::Aggressive => "aggressive",
            HumourLabel::Neutral => "neutral",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|l| l.name() == name)
    }
}

impl TryFrom<u8> for HumourLabel {
    type Error = Error;

    fn try_from(code: u8) -> Result<Self> {
        Self::from_code(code as i64)
    }
}

impl From<HumourLabel> for u8 {
    fn from(label: HumourLabel) -> u8 {
        label.code()
    }
}

impl fmt::Display for HumourLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Stage-one label space of the cascade: affiliative and aggressive merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FourClassLabel {
    SelfEnhancing = 0,
    SelfDeprecating = 1,
    Combined = 2,
    Neutral = 3,
}

impl FourClassLabel {
    pub const COUNT: usize = 4;

    pub fn from_index(index: usize) -> Option<Self> {
        match index {
            0 => Some(FourClassLabel::SelfEnhancing),
            1 => Some(FourClassLabel::SelfDeprecating),
            2 => Some(FourClassLabel::Combined),
            3 => Some(FourClassLabel::Neutral),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Stage-two label space: affiliative (0) versus aggressive (1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinaryLabel {
    Affiliative = 0,
    Aggressive = 1,
}

impl BinaryLabel {
    pub const COUNT: usize = 2;

    pub fn from_index(index: usize) -> Option<Self> {
        match index {
            0 => Some(BinaryLabel::Affiliative),
            1 => Some(BinaryLabel::Aggressive),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

pub fn remap_to_four_class(label: HumourLabel) -> FourClassLabel {
    match label {
        HumourLabel::SelfEnhancing => FourClassLabel::SelfEnhancing,
        HumourLabel::SelfDeprecating => FourClassLabel::SelfDeprecating,
        HumourLabel::Affiliative | HumourLabel::Aggressive => FourClassLabel::Combined,
        HumourLabel::Neutral => FourClassLabel::Neutral,
    }
}

pub fn remap_to_binary(label: HumourLabel) -> Result<BinaryLabel> {
    match label {
        HumourLabel::Affiliative => Ok(BinaryLabel::Affiliative),
        HumourLabel::Aggressive => Ok(BinaryLabel::Aggressive),
        other => Err(Error::NotCombinedLabel(other.code())),
    }
}

/// Inverse of [`remap_to_four_class`] for the non-combined classes.
pub fn four_class_to_five(label: FourClassLabel) -> Option<HumourLabel> {
    match label {
        FourClassLabel::SelfEnhancing => Some(HumourLabel::SelfEnhancing),
        FourClassLabel::SelfDeprecating => Some(HumourLabel::SelfDeprecating),
        FourClassLabel::Combined => None,
        FourClassLabel::Neutral => Some(HumourLabel::Neutral),
    }
}

pub fn binary_to_five(label: BinaryLabel) -> HumourLabel {
    match label {
        BinaryLabel::Affiliative => HumourLabel::Affiliative,
        BinaryLabel::Aggressive => HumourLabel::Aggressive,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub text: String,
    pub label: Option<HumourLabel>,
    pub source: Option<String>,
}

impl Instance {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<HumourLabel>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label,
            source: None,
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    /// Whitespace-separated word count.
    pub fn word_count(&self) -> usize {
        self.text.split_whitespace().count()
    }
}

/// An ordered, immutable collection of instances with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    instances: Vec<Instance>,
    class_counts: [usize; HumourLabel::COUNT],
}

impl Corpus {
    /// Validates ids and texts. An empty corpus is allowed here (split parts
    /// can be empty); ingestion rejects empty files separately.
    pub fn new(instances: Vec<Instance>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut class_counts = [0; HumourLabel::COUNT];
        for instance in &instances {
            if instance.text.trim().is_empty() {
                return Err(Error::EmptyText(instance.id.clone()));
            }
            if !seen.insert(instance.id.as_str()) {
                return Err(Error::DuplicateId(instance.id.clone()));
            }
            if let Some(label) = instance.label {
                class_counts[label.index()] += 1;
            }
        }
        Ok(Self {
            instances,
            class_counts,
        })
    }

    fn from_validated(instances: Vec<Instance>) -> Self {
        let mut class_counts = [0; HumourLabel::COUNT];
        for label in instances.iter().filter_map(|i| i.label) {
            class_counts[label.index()] += 1;
        }
        Self {
            instances,
            class_counts,
        }
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Counts per label code 0..4. Unlabeled instances are not counted.
    pub fn class_counts(&self) -> [usize; HumourLabel::COUNT] {
        self.class_counts
    }

    pub fn count(&self, label: HumourLabel) -> usize {
        self.class_counts[label.index()]
    }

    pub fn unlabeled(&self) -> usize {
        self.len() - self.class_counts.iter().sum::<usize>()
    }

    /// `(min, max)` whitespace word counts, `None` for an empty corpus.
    pub fn length_range(&self) -> Option<(usize, usize)> {
        let counts = self.instances.iter().map(Instance::word_count);
        let min = counts.clone().min()?;
        Some((min, counts.max()?))
    }

    /// Sub-corpus of the instances matching `keep`, order preserved.
    pub fn filter(&self, mut keep: impl FnMut(&Instance) -> bool) -> Corpus {
        Corpus::from_validated(self.instances.iter().filter(|i| keep(i)).cloned().collect())
    }

    fn select(&self, order: &[usize]) -> Corpus {
        Corpus::from_validated(order.iter().map(|&i| self.instances[i].clone()).collect())
    }

    /// Gold labels in order; errors on the first unlabeled instance.
    pub fn gold_labels(&self) -> Result<Vec<HumourLabel>> {
        self.instances
            .iter()
            .map(|i| i.label.ok_or_else(|| Error::Unlabeled(i.id.clone())))
            .collect()
    }
}

/// A fraction `numerator / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub numerator: u64,
    pub denominator: u64,
}

impl Ratio {
    pub const fn new(numerator: u64, denominator: u64) -> Self {
        Self {
            numerator,
            denominator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub seed: u64,
    pub test_fraction: Ratio,
    pub folds: usize,
    /// Per-class split for `train_test_split`; off by default.
    #[serde(default)]
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            seed: 100,
            test_fraction: Ratio::new(1, 5),
            folds: 5,
            stratified: false,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let Ratio {
            numerator,
            denominator,
        } = self.test_fraction;
        if numerator == 0 || numerator >= denominator {
            return Err(Error::InvalidSplit("test fraction must lie strictly between 0 and 1"));
        }
        if self.folds < 2 {
            return Err(Error::InvalidSplit("folds must be at least 2"));
        }
        Ok(())
    }

    /// `ceil((1 - test_fraction) * n)`.
    pub fn train_size(&self, n: usize) -> usize {
        let Ratio {
            numerator,
            denominator,
        } = self.test_fraction;
        let keep = (denominator - numerator) as u128 * n as u128;
        keep.div_ceil(denominator as u128) as usize
    }
}

/// Seeded shuffle, then the first `ceil((1 - f) N)` instances train and the
/// rest test. With `spec.stratified`, the same rule is applied per label
/// (unlabeled instances form their own group) on the shuffled order.
pub fn train_test_split(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus)> {
    spec.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let order = DeterministicRng::new(spec.seed).permutation(corpus.len());
    if !spec.stratified {
        let cut = spec.train_size(order.len());
        return Ok((corpus.select(&order[..cut]), corpus.select(&order[cut..])));
    }
    let mut groups: BTreeMap<Option<HumourLabel>, Vec<usize>> = BTreeMap::new();
    for &i in &order {
        groups.entry(corpus.instances[i].label).or_default().push(i);
    }
    let mut in_train = alloc::vec![false; corpus.len()];
    for members in groups.values() {
        for &i in &members[..spec.train_size(members.len())] {
            in_train[i] = true;
        }
    }
    let (train, test): (Vec<usize>, Vec<usize>) = order.iter().partition(|&&i| in_train[i]);
    Ok((corpus.select(&train), corpus.select(&test)))
}

/// One `(train, validation)` pair of a k-fold split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Corpus,
    pub validation: Corpus,
}

/// One seeded shuffle, then contiguous blocks; the first `N mod k` folds get
/// one extra instance.
pub fn kfold(corpus: &Corpus, spec: &SplitSpec) -> Result<Vec<Fold>> {
    spec.validate()?;
    let n = corpus.len();
    if n < spec.folds {
        return Err(Error::TooFewForFolds {
            size: n,
            folds: spec.folds,
        });
    }
    let order = DeterministicRng::new(spec.seed).permutation(n);
    let (base, extra) = (n / spec.folds, n % spec.folds);
    let mut folds = Vec::with_capacity(spec.folds);
    let mut start = 0;
    for k in 0..spec.folds {
        let end = start + base + usize::from(k < extra);
        let train: Vec<usize> = order[..start].iter().chain(&order[end..]).copied().collect();
        folds.push(Fold {
            train: corpus.select(&train),
            validation: corpus.select(&order[start..end]),
        });
        start = end;
    }
    Ok(folds)
}

/// Built-in English stop words (version 1 of the shipped list).
pub fn stop_words() -> impl Iterator<Item = &'static str> {
    include_str!("../data/stopwords_en_v1.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Most frequent non-stop-word tokens among instances with `label`, ranked by
/// count descending then token ascending.
pub fn class_term_frequencies(
    corpus: &Corpus,
    label: HumourLabel,
    top_k: usize,
) -> Result<Vec<(String, usize)>> {
    if corpus.count(label) == 0 {
        return Err(Error::NoInstancesWithLabel(label.code()));
    }
    let stop: BTreeSet<&str> = stop_words().collect();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for instance in corpus.instances().iter().filter(|i| i.label == Some(label)) {
        for token in Tokenizer.tokenize(&instance.text) {
            if !stop.contains(token.as_str()) {
                *counts.entry(token).or_insert(0) += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_k);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    fn labelled(n: usize) -> Corpus {
        Corpus::new(
            (0..n)
                .map(|i| {
                    Instance::new(
                        format!("id{i}"),
                        format!("text {i}"),
                        Some(HumourLabel::ALL[i % 5]),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn label_codes_are_fixed() {
        for (code, name) in [
            "self-enhancing",
            "self-deprecating",
            "affiliative",
            "aggressive",
            "neutral",
        ]
        .into_iter()
        .enumerate()
        {
            let label = HumourLabel::from_code(code as i64).unwrap();
            assert_eq!(label.name(), name);
            assert_eq!(label.code() as usize, code);
            assert_eq!(HumourLabel::from_name(name), Some(label));
        }
        assert_eq!(HumourLabel::from_code(5), Err(Error::InvalidLabel(5)));
        assert_eq!(HumourLabel::from_code(-1), Err(Error::InvalidLabel(-1)));
    }

    #[test]
    fn counts_for_small_corpus() {
        let c = Corpus::new(vec![
            Instance::new("a", "x", Some(HumourLabel::SelfEnhancing)),
            Instance::new("b", "y", Some(HumourLabel::SelfEnhancing)),
            Instance::new("c", "z", Some(HumourLabel::Neutral)),
        ])
        .unwrap();
        assert_eq!(c.class_counts(), [2, 0, 0, 0, 1]);
    }

    #[test]
    fn corpus_validation() {
        let dup = Corpus::new(vec![Instance::new("a", "x", None), Instance::new("a", "y", None)]);
        assert_eq!(dup, Err(Error::DuplicateId("a".to_string())));
        let blank = Corpus::new(vec![Instance::new("a", "  \t", None)]);
        assert_eq!(blank, Err(Error::EmptyText("a".to_string())));
    }

    #[test]
    fn split_sizes_use_ceiling() {
        let spec = SplitSpec::default();
        assert_eq!(spec.train_size(1463), 1171);
        let (train, test) = train_test_split(&labelled(1463), &spec).unwrap();
        assert_eq!((train.len(), test.len()), (1171, 292));
        let (train, test) = train_test_split(&labelled(5), &spec).unwrap();
        assert_eq!((train.len(), test.len()), (4, 1));
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let corpus = labelled(100);
        let spec = SplitSpec::default();
        let a = train_test_split(&corpus, &spec).unwrap();
        let b = train_test_split(&corpus, &spec).unwrap();
        assert_eq!(a, b);
        let mut ids: Vec<&str> = a.0.instances().iter().chain(a.1.instances()).map(|i| i.id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 100);
        let other = train_test_split(&corpus, &SplitSpec { seed: 101, ..spec }).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn stratified_split_keeps_class_ratios() {
        let spec = SplitSpec {
            stratified: true,
            ..SplitSpec::default()
        };
        let (train, test) = train_test_split(&labelled(100), &spec).unwrap();
        assert_eq!(train.class_counts(), [16; 5]);
        assert_eq!(test.class_counts(), [4; 5]);
    }

    #[test]
    fn invalid_split_specs() {
        let corpus = labelled(10);
        for spec in [
            SplitSpec { test_fraction: Ratio::new(0, 5), ..SplitSpec::default() },
            SplitSpec { test_fraction: Ratio::new(5, 5), ..SplitSpec::default() },
            SplitSpec { folds: 1, ..SplitSpec::default() },
        ] {
            assert!(matches!(train_test_split(&corpus, &spec), Err(Error::InvalidSplit(_))));
        }
        assert_eq!(
            train_test_split(&Corpus::default(), &SplitSpec::default()),
            Err(Error::EmptyCorpus)
        );
    }

    #[test]
    fn kfold_sizes() {
        let folds = kfold(&labelled(1463), &SplitSpec::default()).unwrap();
        let sizes: Vec<usize> = folds.iter().map(|f| f.validation.len()).collect();
        assert_eq!(sizes, vec![293, 293, 293, 292, 292]);
        for f in &folds {
            assert_eq!(f.train.len() + f.validation.len(), 1463);
        }
        let folds = kfold(&labelled(10), &SplitSpec::default()).unwrap();
        assert!(folds.iter().all(|f| f.validation.len() == 2));
        assert_eq!(
            kfold(&labelled(4), &SplitSpec::default()),
            Err(Error::TooFewForFolds { size: 4, folds: 5 })
        );
    }

    #[test]
    fn remaps() {
        use HumourLabel::*;
        assert_eq!(remap_to_four_class(Aggressive), FourClassLabel::Combined);
        assert_eq!(remap_to_four_class(Affiliative), FourClassLabel::Combined);
        assert_eq!(remap_to_four_class(Neutral).index(), 3);
        assert_eq!(remap_to_four_class(SelfEnhancing).index(), 0);
        assert_eq!(remap_to_four_class(SelfDeprecating).index(), 1);
        assert_eq!(remap_to_binary(Affiliative).unwrap().index(), 0);
        assert_eq!(remap_to_binary(Aggressive).unwrap().index(), 1);
        assert_eq!(remap_to_binary(SelfEnhancing), Err(Error::NotCombinedLabel(0)));
        for label in [Affiliative, Aggressive] {
            assert_eq!(binary_to_five(remap_to_binary(label).unwrap()), label);
        }
        for label in [SelfEnhancing, SelfDeprecating, Neutral] {
            assert_eq!(four_class_to_five(remap_to_four_class(label)), Some(label));
        }
    }

    #[test]
    fn term_frequencies() {
        let c = Corpus::new(vec![Instance::new("a", "love love laughter", Some(HumourLabel::SelfEnhancing))]).unwrap();
        let top = class_term_frequencies(&c, HumourLabel::SelfEnhancing, 2).unwrap();
        assert_eq!(top, vec![("love".to_string(), 2), ("laughter".to_string(), 1)]);
        assert!(class_term_frequencies(&c, HumourLabel::SelfEnhancing, 0).unwrap().is_empty());
        assert_eq!(
            class_term_frequencies(&c, HumourLabel::Neutral, 3),
            Err(Error::NoInstancesWithLabel(4))
        );
    }

    #[test]
    fn stop_words_drop_function_words() {
        let words: Vec<&str> = stop_words().collect();
        assert!(words.len() >= 120);
        assert!(words.contains(&"the"));
        assert!(!words.contains(&"self"));
        assert!(!words.contains(&"love"));
        let c = Corpus::new(vec![Instance::new("a", "The cat and the hat", Some(HumourLabel::Neutral))]).unwrap();
        let top = class_term_frequencies(&c, HumourLabel::Neutral, 10).unwrap();
        assert_eq!(top, vec![("cat".to_string(), 1), ("hat".to_string(), 1)]);
    }
}
