//! Corpus files: JSONL (one record per line) and CSV with header
//! `id,text,label,source`.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use humour_styles_core::corpus::{Corpus, HumourLabel, Instance};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DataFormat {
    Jsonl,
    Csv,
}

impl DataFormat {
    /// Guesses from the extension, then from the first non-blank byte.
    pub fn detect(path: &Path, contents: &str) -> DataFormat {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("jsonl" | "ndjson" | "json") => DataFormat::Jsonl,
            Some("csv") => DataFormat::Csv,
            _ if contents.trim_start().starts_with('{') => DataFormat::Jsonl,
            _ => DataFormat::Csv,
        }
    }
}

/// One corpus record as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub label: Option<i64>,
    #[serde(default)]
    pub source: Option<String>,
}

impl From<&Instance> for Record {
    fn from(i: &Instance) -> Self {
        Record {
            id: i.id.clone(),
            text: i.text.clone(),
            label: i.label.map(|l| i64::from(l.code())),
            source: i.source.clone(),
        }
    }
}

pub fn read_corpus(path: &Path, format: Option<DataFormat>) -> Result<Corpus> {
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let format = format.unwrap_or_else(|| DataFormat::detect(path, &contents));
    parse_corpus(path, &contents, format)
}

pub fn parse_corpus(path: &Path, contents: &str, format: DataFormat) -> Result<Corpus> {
    let records = match format {
        DataFormat::Jsonl => parse_jsonl(path, contents)?,
        DataFormat::Csv => parse_csv(path, contents)?,
    };
    if records.is_empty() {
        return Err(humour_styles_core::Error::EmptyCorpus.into());
    }
    let mut seen = HashSet::new();
    let mut instances = Vec::with_capacity(records.len());
    for (line, r) in records {
        if r.text.trim().is_empty() {
            return Err(Error::parse(path, line, format!("record {:?} has empty text", r.id)));
        }
        if !seen.insert(r.id.clone()) {
            return Err(Error::parse(path, line, format!("duplicate id {:?}", r.id)));
        }
        let label = r
            .label
            .map(HumourLabel::from_code)
            .transpose()
            .map_err(|e| Error::parse(path, line, e))?;
        let mut instance = Instance::new(r.id, r.text, label);
        instance.source = r.source;
        instances.push(instance);
    }
    Ok(Corpus::new(instances)?)
}

fn parse_jsonl(path: &Path, contents: &str) -> Result<Vec<(u64, Record)>> {
    let mut out = Vec::new();
    for (i, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i as u64 + 1;
        let record: Record = serde_json::from_str(line).map_err(|e| Error::parse(path, line_no, e))?;
        out.push((line_no, record));
    }
    Ok(out)
}

fn parse_csv(path: &Path, contents: &str) -> Result<Vec<(u64, Record)>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(contents.as_bytes());
    let headers = reader.headers().map_err(|e| Error::parse(path, 1, e))?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(id_col), Some(text_col)) = (column("id"), column("text")) else {
        return Err(Error::parse(path, 1, "CSV header must contain id,text (and optionally label,source)"));
    };
    let (label_col, source_col) = (column("label"), column("source"));
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(path, line, e)
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |col: Option<usize>| col.and_then(|c| row.get(c)).filter(|v| !v.is_empty());
        let label = field(label_col)
            .map(|v| v.trim().parse::<i64>().map_err(|_| Error::parse(path, line, format!("label {v:?} is not an integer"))))
            .transpose()?;
        out.push((
            line,
            Record {
                id: row.get(id_col).unwrap_or_default().to_string(),
                text: row.get(text_col).unwrap_or_default().to_string(),
                label,
                source: field(source_col).map(str::to_string),
            },
        ));
    }
    Ok(out)
}

pub fn write_jsonl(corpus: &Corpus, mut out: impl Write) -> std::io::Result<()> {
    for i in corpus.instances() {
        serde_json::to_writer(&mut out, &Record::from(i))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_csv(corpus: &Corpus, out: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "text", "label", "source"])?;
    for i in corpus.instances() {
        let label = i.label.map(|l| l.code().to_string()).unwrap_or_default();
        w.write_record([i.id.as_str(), i.text.as_str(), label.as_str(), i.source.as_deref().unwrap_or("")])?;
    }
    w.flush()
}

/// Census line items for `ingest`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Census {
    pub total: usize,
    pub counts: [usize; HumourLabel::COUNT],
    pub unlabeled: usize,
    pub words: Option<(usize, usize)>,
}

impl Census {
    pub fn of(corpus: &Corpus) -> Self {
        Census {
            total: corpus.len(),
            counts: corpus.class_counts(),
            unlabeled: corpus.unlabeled(),
            words: corpus.length_range(),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::from("| label | style | count |\n|---|---|---|\n");
        for l in HumourLabel::ALL {
            s.push_str(&format!("| {} | {} | {} |\n", l.code(), l.name(), self.counts[l.index()]));
        }
        if self.unlabeled > 0 {
            s.push_str(&format!("| - | unlabeled | {} |\n", self.unlabeled));
        }
        s.push_str(&format!("| | total | {} |\n", self.total));
        if let Some((lo, hi)) = self.words {
            s.push_str(&format!("\nlengths: {lo} to {hi} words\n"));
        }
        s
    }
}
