use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("instance {0:?} has empty text")]
    EmptyText(String),
    #[error("label {0} outside 0..4")]
    InvalidLabel(i64),
    #[error("label {0} is not affiliative (2) or aggressive (3)")]
    NotCombinedLabel(u8),
    #[error("invalid split spec: {0}")]
    InvalidSplit(&'static str),
    #[error("corpus has {size} instances, fewer than {folds} folds")]
    TooFewForFolds { size: usize, folds: usize },
    #[error("no instances with label {0}")]
    NoInstancesWithLabel(u8),
    #[error("instance {0:?} has no label")]
    Unlabeled(String),
    #[error("class absent: {0}")]
    ClassAbsent(String),

    #[error("rater ids must be unique, {0:?} repeated")]
    DuplicateRater(String),
    #[error("fewer than 2 raters")]
    TooFewRaters,
    #[error("item {item:?} has {found} votes, expected {expected}")]
    UnequalVoteCounts {
        item: String,
        expected: usize,
        found: usize,
    },
    #[error("item {0:?} has fewer than 2 votes")]
    TooFewVotes(String),
    #[error("{0} item(s) remain tied after auxiliary votes")]
    Unresolved(usize),

    #[error("corpus contains no tokens")]
    NoTokens,
    #[error("dim mismatch at row {row}: expected {expected}, found {found}")]
    DimMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at row {0}")]
    NonFinite(usize),
    #[error("missing {kind} features for instance {id:?}")]
    MissingFeature { kind: String, id: String },
    #[error("feature kind mismatch: model expects {0}")]
    FeatureKind(&'static str),

    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(&'static str),
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: usize, n_classes: usize },

    #[error("label sequences differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    EmptyInput,
    #[error("fewer than 5 non-zero differences ({0})")]
    TooFewDifferences(usize),
    #[error("misaligned model lists: {0}")]
    Misaligned(String),
}
