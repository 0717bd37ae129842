//! Multi-rater annotation: agreement statistics and label aggregation.
//!
//! Gold labels come from a majority over the human raters. Items the humans
//! cannot settle are re-voted together with the auxiliary raters (LLM
//! chatbots whose votes are read from data, never generated here).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::HumourLabel;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RaterKind {
    Human,
    Auxiliary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rater {
    pub id: String,
    pub kind: RaterKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedItem {
    pub id: String,
    pub text: String,
    /// Rater id → vote. Raters may abstain.
    pub votes: BTreeMap<String, HumourLabel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RaterFilter {
    HumanOnly,
    All,
}

impl RaterFilter {
    fn admits(self, kind: RaterKind) -> bool {
        matches!((self, kind), (RaterFilter::All, _) | (_, RaterKind::Human))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationSet {
    raters: Vec<Rater>,
    items: Vec<AnnotatedItem>,
}

impl AnnotationSet {
    /// Rater ids must be unique and every vote must come from a listed rater.
    pub fn new(raters: Vec<Rater>, items: Vec<AnnotatedItem>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        for rater in &raters {
            if !ids.insert(rater.id.as_str()) {
                return Err(Error::DuplicateRater(rater.id.clone()));
            }
        }
        let mut item_ids = BTreeSet::new();
        for item in &items {
            if !item_ids.insert(item.id.as_str()) {
                return Err(Error::DuplicateId(item.id.clone()));
            }
            if let Some(unknown) = item.votes.keys().find(|r| !ids.contains(r.as_str())) {
                return Err(Error::Misaligned(alloc::format!(
                    "item {:?} has a vote from unknown rater {unknown:?}",
                    item.id
                )));
            }
        }
        Ok(Self { raters, items })
    }

    pub fn raters(&self) -> &[Rater] {
        &self.raters
    }

    pub fn items(&self) -> &[AnnotatedItem] {
        &self.items
    }

    fn kind_of(&self, rater: &str) -> Option<RaterKind> {
        self.raters.iter().find(|r| r.id == rater).map(|r| r.kind)
    }

    /// Votes of `item` from raters admitted by `filter`, in rater order.
    pub fn votes(&self, item: &AnnotatedItem, filter: RaterFilter) -> Vec<HumourLabel> {
        self.raters
            .iter()
            .filter(|r| filter.admits(r.kind))
            .filter_map(|r| item.votes.get(&r.id).copied())
            .collect()
    }

    fn auxiliary_votes(&self, item: &AnnotatedItem) -> usize {
        item.votes
            .keys()
            .filter(|r| self.kind_of(r) == Some(RaterKind::Auxiliary))
            .count()
    }

    /// Item × category count table under `filter`, checking the fixed-n
    /// precondition of Fleiss' kappa.
    pub fn count_table(&self, filter: RaterFilter) -> Result<Vec<Vec<usize>>> {
        let n_raters = self.raters.iter().filter(|r| filter.admits(r.kind)).count();
        if n_raters < 2 {
            return Err(Error::TooFewRaters);
        }
        if self.items.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut expected = None;
        let mut table = Vec::with_capacity(self.items.len());
        for item in &self.items {
            let votes = self.votes(item, filter);
            if votes.len() < 2 {
                return Err(Error::TooFewVotes(item.id.clone()));
            }
            match expected {
                None => expected = Some(votes.len()),
                Some(n) if n != votes.len() => {
                    return Err(Error::UnequalVoteCounts {
                        item: item.id.clone(),
                        expected: n,
                        found: votes.len(),
                    })
                }
                Some(_) => {}
            }
            let mut row = alloc::vec![0; HumourLabel::COUNT];
            for v in votes {
                row[v.index()] += 1;
            }
            table.push(row);
        }
        Ok(table)
    }
}

/// Fleiss' kappa from an item × category count table with a constant number
/// of ratings per item.
///
/// Evaluated as a single ratio of exact integer sums, so the only rounding is
/// the final division. Returns 1 when every rating falls into one category.
pub fn fleiss_kappa_from_counts(table: &[Vec<usize>]) -> Result<f64> {
    let first = table.first().ok_or(Error::EmptyInput)?;
    let n: usize = first.iter().sum();
    if n < 2 {
        return Err(Error::TooFewVotes(String::from("row 0")));
    }
    let categories = first.len();
    let mut category_totals = alloc::vec![0i128; categories];
    let mut squares = 0i128;
    for (i, row) in table.iter().enumerate() {
        let row_n: usize = row.iter().sum();
        if row_n != n || row.len() != categories {
            return Err(Error::UnequalVoteCounts {
                item: alloc::format!("{i}"),
                expected: n,
                found: row_n,
            });
        }
        for (j, &c) in row.iter().enumerate() {
            squares += (c * c) as i128;
            category_totals[j] += c as i128;
        }
    }
    let items = table.len() as i128;
    let n = n as i128;
    // P̄ = agree / agree_den, P̄e = chance / chance_den.
    let agree = squares - items * n;
    let agree_den = items * n * (n - 1);
    let chance: i128 = category_totals.iter().map(|c| c * c).sum();
    let chance_den = (items * n) * (items * n);
    if chance == chance_den {
        return Ok(1.0);
    }
    let numerator = agree * chance_den - chance * agree_den;
    let denominator = agree_den * (chance_den - chance);
    Ok(numerator as f64 / denominator as f64)
}

pub fn fleiss_kappa(set: &AnnotationSet, filter: RaterFilter) -> Result<f64> {
    fleiss_kappa_from_counts(&set.count_table(filter)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MajorityVote {
    Label(HumourLabel),
    Tie,
}

/// The label with a strictly maximal count, or `Tie` when the maximum is shared.
pub fn majority_vote(votes: &[HumourLabel]) -> MajorityVote {
    let mut counts = [0usize; HumourLabel::COUNT];
    for v in votes {
        counts[v.index()] += 1;
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    let mut winners = HumourLabel::ALL.into_iter().filter(|l| counts[l.index()] == max);
    match (max, winners.next(), winners.next()) {
        (0, _, _) => MajorityVote::Tie,
        (_, Some(label), None) => MajorityVote::Label(label),
        _ => MajorityVote::Tie,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolutionPhase {
    /// Settled by the human raters alone.
    Human,
    /// Settled after adding the auxiliary votes.
    Auxiliary,
    /// Still tied with every vote counted.
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionEntry {
    pub item_id: String,
    pub phase: ResolutionPhase,
    pub label: Option<HumourLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Resolution {
    pub labels: BTreeMap<String, HumourLabel>,
    pub ledger: Vec<ResolutionEntry>,
    pub unresolved: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResolutionMode {
    /// Any item left tied is an error.
    Strict,
    /// Tied items are listed in `unresolved`; no label is guessed.
    #[default]
    Lenient,
}

/// Two-phase aggregation: human majority first, then the majority over human
/// and auxiliary votes for the items the humans left tied.
pub fn resolve_with_auxiliary(set: &AnnotationSet, mode: ResolutionMode) -> Result<Resolution> {
    let mut out = Resolution::default();
    for item in set.items() {
        let human = set.votes(item, RaterFilter::HumanOnly);
        let (phase, label) = match majority_vote(&human) {
            MajorityVote::Label(label) => (ResolutionPhase::Human, Some(label)),
            MajorityVote::Tie if set.auxiliary_votes(item) == 0 => (ResolutionPhase::Unresolved, None),
            MajorityVote::Tie => match majority_vote(&set.votes(item, RaterFilter::All)) {
                MajorityVote::Label(label) => (ResolutionPhase::Auxiliary, Some(label)),
                MajorityVote::Tie => (ResolutionPhase::Unresolved, None),
            },
        };
        match label {
            Some(label) => {
                out.labels.insert(item.id.clone(), label);
            }
            None => out.unresolved.push(item.id.clone()),
        }
        out.ledger.push(ResolutionEntry {
            item_id: item.id.clone(),
            phase,
            label,
        });
    }
    if mode == ResolutionMode::Strict && !out.unresolved.is_empty() {
        return Err(Error::Unresolved(out.unresolved.len()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgreementClass {
    Unanimous,
    /// At least two raters agree, but not all.
    Majority,
    /// No two raters agree.
    FullDisagreement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub kappa: f64,
    pub n_items: usize,
    pub n_raters: usize,
    pub per_item: Vec<(String, AgreementClass)>,
}

impl AgreementReport {
    pub fn count(&self, class: AgreementClass) -> usize {
        self.per_item.iter().filter(|(_, c)| *c == class).count()
    }
}

pub fn classify_agreement(votes: &[HumourLabel]) -> AgreementClass {
    let mut counts = [0usize; HumourLabel::COUNT];
    for v in votes {
        counts[v.index()] += 1;
    }
    let max = counts.iter().copied().max().unwrap_or(0);
    if max == votes.len() {
        AgreementClass::Unanimous
    } else if max >= 2 {
        AgreementClass::Majority
    } else {
        AgreementClass::FullDisagreement
    }
}

pub fn agreement_census(set: &AnnotationSet, filter: RaterFilter) -> Result<AgreementReport> {
    let table = set.count_table(filter)?;
    let kappa = fleiss_kappa_from_counts(&table)?;
    let per_item = set
        .items()
        .iter()
        .map(|item| (item.id.clone(), classify_agreement(&set.votes(item, filter))))
        .collect();
    Ok(AgreementReport {
        kappa,
        n_items: table.len(),
        n_raters: table[0].iter().sum(),
        per_item,
    })
}
