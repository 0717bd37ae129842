//! Evaluation reports on disk.
//!
//! `eval` writes `<slug>.report.json` (full precision, read back by
//! `compare`), `<slug>.csv` and `<slug>.md` into the report directory, plus a
//! `<slug>.meta.json` sidecar holding the only timestamp.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use humour_styles_core::cascade::PipelineSpec;
use humour_styles_core::corpus::SplitSpec;
use humour_styles_core::eval::{percent, ConfusionMatrix, CrossValidation, EvalReport, MetricBundle, PairedComparison};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REPORT_SUFFIX: &str = ".report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Cv,
    Test,
}

/// One labelled metric row: a CV fold, the CV mean, or the test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub fold: String,
    pub metrics: MetricBundle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub format_version: u32,
    pub name: String,
    pub scope: Scope,
    pub pipeline: PipelineSpec,
    pub split: SplitSpec,
    pub rows: Vec<MetricRow>,
    /// Summed over folds for CV.
    pub confusion: ConfusionMatrix,
    /// Row that `compare` reads: the CV mean or the test result.
    pub summary: MetricBundle,
}

impl ModelReport {
    pub fn from_cv(name: &str, pipeline: &PipelineSpec, split: &SplitSpec, cv: &CrossValidation) -> Self {
        let mut rows: Vec<MetricRow> = cv
            .folds
            .iter()
            .enumerate()
            .map(|(k, f)| MetricRow {
                fold: (k + 1).to_string(),
                metrics: f.metrics.clone(),
            })
            .collect();
        rows.push(MetricRow {
            fold: "mean".into(),
            metrics: cv.mean.clone(),
        });
        Self {
            format_version: 1,
            name: name.into(),
            scope: Scope::Cv,
            pipeline: pipeline.clone(),
            split: *split,
            rows,
            confusion: cv.pooled.clone(),
            summary: cv.mean.clone(),
        }
    }

    pub fn from_test(name: &str, pipeline: &PipelineSpec, split: &SplitSpec, report: &EvalReport) -> Self {
        Self {
            format_version: 1,
            name: name.into(),
            scope: Scope::Test,
            pipeline: pipeline.clone(),
            split: *split,
            rows: vec![MetricRow {
                fold: "test".into(),
                metrics: report.metrics.clone(),
            }],
            confusion: report.confusion.clone(),
            summary: report.metrics.clone(),
        }
    }

    /// Wide CSV: one row per fold (and the mean), one column per metric.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let columns: Vec<String> = self.summary.flatten().into_iter().map(|(n, _)| n).collect();
        let mut header = vec!["model".to_string(), "scope".into(), "fold".into()];
        header.extend(columns);
        w.write_record(&header).map_err(csv_error)?;
        let scope = match self.scope {
            Scope::Cv => "cv",
            Scope::Test => "test",
        };
        for row in &self.rows {
            let mut record = vec![self.name.clone(), scope.to_string(), row.fold.clone()];
            record.extend(row.metrics.flatten().into_iter().map(|(_, v)| v.to_string()));
            w.write_record(&record).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("# {}\n\n", self.name);
        let _ = writeln!(
            s,
            "{} evaluation, seed {}, {}\n",
            match self.scope {
                Scope::Cv => format!("{}-fold cross-validation", self.split.folds),
                Scope::Test => "held-out test".to_string(),
            },
            self.split.seed,
            describe_pipeline(&self.pipeline),
        );
        s.push_str("| fold | accuracy | precision | recall | f1 |\n|---|---|---|---|---|\n");
        for row in &self.rows {
            let m = &row.metrics;
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} |",
                row.fold,
                percent(m.accuracy),
                percent(m.precision),
                percent(m.recall),
                percent(m.f1)
            );
        }
        s.push_str("\n## Per class\n\n| class | precision | recall | f1 |\n|---|---|---|---|\n");
        for c in &self.summary.per_class {
            let _ = writeln!(s, "| {} | {} | {} | {} |", c.name, percent(c.precision), percent(c.recall), percent(c.f1));
        }
        s.push_str("\n## Confusion matrix\n\nRows are true classes, columns predicted.\n\n");
        s.push_str(&confusion_grid(&self.confusion));
        s
    }

    pub fn slug(&self) -> String {
        slug(&self.name)
    }

    /// Writes the JSON, CSV and Markdown reports and the metadata sidecar.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let stem = self.slug();
        let json_path = dir.join(format!("{stem}{REPORT_SUFFIX}"));
        write_file(&json_path, serde_json::to_string_pretty(self)? + "\n")?;
        write_file(&dir.join(format!("{stem}.csv")), self.to_csv()?)?;
        write_file(&dir.join(format!("{stem}.md")), self.to_markdown())?;
        let seconds = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = serde_json::json!({
            "created_unix": seconds,
            "tool_version": env!("CARGO_PKG_VERSION"),
        });
        write_file(&dir.join(format!("{stem}.meta.json")), serde_json::to_string_pretty(&meta)? + "\n")?;
        Ok(json_path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.into(),
            message: e.to_string(),
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

fn write_file(path: &Path, contents: String) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn describe_pipeline(p: &PipelineSpec) -> String {
    match p {
        PipelineSpec::Single { spec } => format!("single model {spec}"),
        PipelineSpec::Cascade { stage1, stage2, .. } => format!("cascade {stage1} then {stage2}"),
    }
}

/// File-name-safe version of a model name (`MUL+XGBoost` → `mul-xgboost`).
pub fn slug(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') && !out.is_empty() {
            out.push('-');
        }
    }
    let out = out.trim_end_matches('-').to_string();
    if out.is_empty() {
        "model".into()
    } else {
        out
    }
}

pub fn confusion_grid(cm: &ConfusionMatrix) -> String {
    let mut s = String::from("| true \\ predicted |");
    for name in &cm.class_names {
        let _ = write!(s, " {name} |");
    }
    s.push_str("\n|---|");
    s.push_str(&"---|".repeat(cm.n_classes()));
    s.push('\n');
    for (name, row) in cm.class_names.iter().zip(&cm.counts) {
        let _ = write!(s, "| {name} |");
        for v in row {
            let _ = write!(s, " {v} |");
        }
        s.push('\n');
    }
    s
}

/// All `*.report.json` files in `dir`, sorted by model name.
pub fn load_report_dir(dir: &Path) -> Result<Vec<ModelReport>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut reports = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(REPORT_SUFFIX)) {
            reports.push(ModelReport::load(&path)?);
        }
    }
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(reports)
}

fn test_cells(c: &PairedComparison) -> (String, String) {
    match &c.test {
        Ok(t) => (format!("{:.1}", t.w), format!("{:.6}", t.p_value)),
        Err(_) => ("n/a".into(), "not applicable".into()),
    }
}

pub fn comparison_markdown(rows: &[PairedComparison]) -> String {
    let n = rows.first().map_or(0, |r| r.pairs.len());
    let mut s = format!("# Single-model vs two-model comparison\n\n{n} aligned model pairs, Wilcoxon signed-rank test.\n\n");
    s.push_str("| metric | W | p | mean single | mean two-model | difference | improved |\n|---|---|---|---|---|---|---|\n");
    for r in rows {
        let (w, p) = test_cells(r);
        let _ = writeln!(
            s,
            "| {} | {w} | {p} | {} | {} | {} | {} of {n} |",
            r.metric,
            percent(r.mean_single),
            percent(r.mean_two),
            percent(r.mean_difference),
            r.improved
        );
    }
    for r in rows {
        if let Err(reason) = &r.test {
            let _ = write!(s, "\n{}: not applicable ({reason})", r.metric);
        }
    }
    if rows.iter().any(|r| r.test.is_err()) {
        s.push('\n');
    }
    s
}

pub fn comparison_csv(rows: &[PairedComparison]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "n_pairs", "w", "p_value", "mean_single", "mean_two", "mean_difference", "improved"])
        .map_err(csv_error)?;
    for r in rows {
        let (w_cell, p_cell) = match &r.test {
            Ok(t) => (t.w.to_string(), t.p_value.to_string()),
            Err(_) => (String::new(), String::new()),
        };
        w.write_record([
            r.metric.clone(),
            r.pairs.len().to_string(),
            w_cell,
            p_cell,
            r.mean_single.to_string(),
            r.mean_two.to_string(),
            r.mean_difference.to_string(),
            r.improved.to_string(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use humour_styles_core::corpus::HumourLabel;
    use humour_styles_core::eval::{compare_approaches, confusion_five, metrics};

    fn report(correct: usize) -> ModelReport {
        let truth: Vec<HumourLabel> = (0..10).map(|i| HumourLabel::ALL[i % 5]).collect();
        let pred: Vec<HumourLabel> = truth
            .iter()
            .enumerate()
            .map(|(i, &t)| if i < correct { t } else { HumourLabel::ALL[(t.index() + 1) % 5] })
            .collect();
        let confusion = confusion_five(&truth, &pred).unwrap();
        let eval = EvalReport {
            ids: (0..10).map(|i| i.to_string()).collect(),
            truth,
            predicted: pred,
            metrics: metrics(&confusion).unwrap(),
            confusion,
        };
        let pipeline = PipelineSpec::Single { spec: "nb".parse().unwrap() };
        ModelReport::from_test("NB", &pipeline, &SplitSpec::default(), &eval)
    }

    #[test]
    fn csv_has_header_and_one_row_per_fold() {
        let csv = report(10).to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("model,scope,fold,accuracy,macro_precision,macro_recall,macro_f1,self-enhancing_precision"));
        assert!(lines[1].starts_with("NB,test,test,1,1,1,1,"));
    }

    #[test]
    fn markdown_renders_percentages() {
        let md = report(7).to_markdown();
        assert!(md.contains("| test | 70.0 |"), "{md}");
        assert!(md.contains("| true \\ predicted | self-enhancing |"), "{md}");
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("MUL+XGBoost"), "mul-xgboost");
        assert_eq!(slug("NB"), "nb");
        assert_eq!(slug("++"), "model");
    }

    #[test]
    fn comparison_tables() {
        let single: Vec<_> = (1..7).map(|c| ("m".to_string() + &c.to_string(), report(c).summary)).collect();
        let two: Vec<_> = (1..7).map(|c| ("m".to_string() + &c.to_string(), report(c + 3).summary)).collect();
        let rows = compare_approaches(&single, &two).unwrap();
        let md = comparison_markdown(&rows);
        assert!(md.contains("| accuracy | 0.0 | 0.031250 |"), "{md}");
        assert_eq!(comparison_csv(&rows).unwrap().lines().count(), 10);
        let same = compare_approaches(&single, &single).unwrap();
        assert!(comparison_markdown(&same).contains("not applicable"));
    }
}
