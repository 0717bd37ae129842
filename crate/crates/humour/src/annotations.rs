//! Annotation files: one JSON object per item with per-rater votes and the
//! kind of each rater.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use humour_styles_core::annotation::{AnnotatedItem, AnnotationSet, Rater, RaterKind};
use humour_styles_core::corpus::HumourLabel;
use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct ItemRecord {
    item_id: String,
    #[serde(default)]
    text: String,
    /// `null` marks an abstention.
    votes: BTreeMap<String, Option<i64>>,
    rater_kind: BTreeMap<String, RaterKind>,
}

pub fn read_annotations(path: &Path) -> Result<AnnotationSet> {
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(path, &contents)
}

/// Raters are listed in order of first appearance.
pub fn parse_annotations(path: &Path, contents: &str) -> Result<AnnotationSet> {
    let mut raters: Vec<Rater> = Vec::new();
    let mut items = Vec::new();
    for (i, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i as u64 + 1;
        let record: ItemRecord = serde_json::from_str(line).map_err(|e| Error::parse(path, line_no, e))?;
        for (id, &kind) in &record.rater_kind {
            match raters.iter().find(|r| &r.id == id) {
                Some(r) if r.kind != kind => {
                    return Err(Error::parse(path, line_no, format!("rater {id:?} changes kind")));
                }
                Some(_) => {}
                None => raters.push(Rater { id: id.clone(), kind }),
            }
        }
        let mut votes = BTreeMap::new();
        for (rater, vote) in record.votes {
            if !raters.iter().any(|r| r.id == rater) {
                return Err(Error::parse(path, line_no, format!("rater {rater:?} has no rater_kind entry")));
            }
            if let Some(code) = vote {
                let label = HumourLabel::from_code(code).map_err(|e| Error::parse(path, line_no, e))?;
                votes.insert(rater, label);
            }
        }
        items.push(AnnotatedItem {
            id: record.item_id,
            text: record.text,
            votes,
        });
    }
    if items.is_empty() {
        return Err(Error::Format {
            path: path.into(),
            message: "no annotated items".into(),
        });
    }
    Ok(AnnotationSet::new(raters, items)?)
}
