//! File formats, persistence, the embedding client, reports and the `humour`
//! command line, on top of `humour-styles-core`.

pub use humour_styles_core as core;

pub mod annotations;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod embeddings;
pub mod error;
pub mod persist;
pub mod report;

pub use error::{Error, Result};
