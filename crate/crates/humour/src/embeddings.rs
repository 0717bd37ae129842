//! Embedding matrices on disk (EMBV1) and over HTTP (`POST /embed`).
//!
//! EMBV1 is line oriented: a header `EMBV1 <model_name> <dim>` followed by
//! one `<id>\t<v1> <v2> ... <vdim>` line per row.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use humour_styles_core::features::EmbeddingMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &str = "EMBV1";

pub fn load_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(path, &contents)
}

pub fn parse_embeddings(path: &Path, contents: &str) -> Result<EmbeddingMatrix> {
    let mut lines = contents.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).unwrap_or_default();
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [MAGIC, model, dim] = fields[..] else {
        return Err(Error::parse(path, 1, format!("expected header `{MAGIC} <model_name> <dim>`")));
    };
    let dim: usize = dim
        .parse()
        .ok()
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::parse(path, 1, format!("invalid dim {dim:?}")))?;
    let mut matrix = EmbeddingMatrix::new(model, dim);
    for (i, line) in lines {
        let line_no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (id, values) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, line_no, "expected `<id>\\t<values>`"))?;
        let vector = values
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|_| Error::parse(path, line_no, format!("invalid number {v:?}"))))
            .collect::<Result<Vec<_>>>()?;
        matrix.push(id, vector).map_err(|e| Error::parse(path, line_no, e))?;
    }
    Ok(matrix)
}

pub fn format_embeddings(matrix: &EmbeddingMatrix) -> String {
    let mut out = format!("{MAGIC} {} {}\n", matrix.model_name(), matrix.dim());
    for (id, row) in matrix.iter() {
        out.push_str(id);
        out.push('\t');
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn save_embeddings(matrix: &EmbeddingMatrix, path: &Path) -> Result<()> {
    fs::write(path, format_embeddings(matrix)).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Serialize)]
struct EmbedRequest<'a> {
    model: &'a str,
    texts: &'a [&'a str],
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct EmbedResponse {
    pub model: String,
    pub dim: usize,
    pub vectors: Vec<Vec<f64>>,
}

/// Where a model's vectors come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EmbeddingProvider {
    File { path: PathBuf },
    Http { url: String },
}

/// Client for the `/embed` endpoint with bounded retries.
#[derive(Debug, Clone)]
pub struct EmbedClient {
    agent: ureq::Agent,
    endpoint: String,
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub batch_size: usize,
}

enum Failure {
    Transient(String),
    Fatal(String),
}

impl EmbedClient {
    /// `base` may be a server root or the full `/embed` URL.
    pub fn new(base: &str) -> Self {
        let base = base.trim_end_matches('/');
        let endpoint = if base.ends_with("/embed") {
            base.to_string()
        } else {
            format!("{base}/embed")
        };
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Self {
            agent,
            endpoint,
            max_attempts: 3,
            initial_backoff: Duration::from_millis(250),
            batch_size: 64,
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn attempt(&self, model: &str, texts: &[&str]) -> std::result::Result<EmbedResponse, Failure> {
        let response = self.agent.post(&self.endpoint).send_json(EmbedRequest { model, texts });
        let mut response = match response {
            Ok(r) => r,
            Err(e @ (ureq::Error::Io(_) | ureq::Error::Timeout(_) | ureq::Error::ConnectionFailed | ureq::Error::HostNotFound)) => {
                return Err(Failure::Transient(e.to_string()));
            }
            Err(e) => return Err(Failure::Fatal(e.to_string())),
        };
        let status = response.status().as_u16();
        if status != 200 {
            let body = response.body_mut().read_to_string().unwrap_or_default();
            let message = format!("HTTP {status}: {}", body.trim());
            return Err(if status >= 500 || status == 429 {
                Failure::Transient(message)
            } else {
                Failure::Fatal(message)
            });
        }
        response
            .body_mut()
            .read_json::<EmbedResponse>()
            .map_err(|e| Failure::Fatal(format!("malformed response: {e}")))
    }

    /// One request, retried with doubling backoff on connection failures
    /// and 5xx responses.
    pub fn embed_batch(&self, model: &str, texts: &[&str]) -> Result<EmbedResponse> {
        let mut delay = self.initial_backoff;
        let mut last = String::new();
        for attempt in 1..=self.max_attempts.max(1) {
            match self.attempt(model, texts) {
                Ok(r) => return Ok(r),
                Err(Failure::Fatal(m)) => return Err(Error::Http(m)),
                Err(Failure::Transient(m)) => last = m,
            }
            if attempt < self.max_attempts {
                thread::sleep(delay);
                delay *= 2;
            }
        }
        Err(Error::Http(format!("unreachable after {} attempts: {last}", self.max_attempts)))
    }
}

/// Embeds `(id, text)` pairs in batches; rows keep the input order.
pub fn fetch_embeddings(client: &EmbedClient, model: &str, items: &[(String, String)]) -> Result<EmbeddingMatrix> {
    let mut matrix: Option<EmbeddingMatrix> = None;
    for batch in items.chunks(client.batch_size.max(1)) {
        let texts: Vec<&str> = batch.iter().map(|(_, t)| t.as_str()).collect();
        let response = client.embed_batch(model, &texts)?;
        if response.vectors.len() != batch.len() {
            return Err(Error::CountMismatch {
                expected: batch.len(),
                got: response.vectors.len(),
            });
        }
        let m = matrix.get_or_insert_with(|| EmbeddingMatrix::new(model, response.dim));
        if response.dim != m.dim() {
            return Err(Error::Http(format!("dim changed from {} to {} between batches", m.dim(), response.dim)));
        }
        for ((id, _), vector) in batch.iter().zip(response.vectors) {
            m.push(id.clone(), vector)?;
        }
    }
    Ok(matrix.unwrap_or_else(|| EmbeddingMatrix::new(model, 0)))
}
