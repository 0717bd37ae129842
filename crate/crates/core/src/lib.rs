//! Core algorithms for humour-style recognition.
//!
//! Everything in this crate is pure computation over in-memory data and
//! builds without `std` (only `alloc` is needed). File formats, HTTP, model
//! persistence and the command line live in the `humour-styles` crate.
//!
//! The modules follow the data flow of an experiment:
//!
//! * [`corpus`]: label taxonomy, validated corpora, seeded splits, term counts
//! * [`annotation`]: Fleiss' kappa, majority vote, auxiliary tie resolution
//! * [`features`]: tokenizer, vocabulary, count vectors, embedding matrices
//! * [`classifiers`]: multinomial naive Bayes, CART, random forest, boosted trees
//! * [`cascade`]: single five-class pipelines and the two-stage cascade
//! * [`eval`]: confusion matrices, metrics, cross-validation, Wilcoxon tests

#![cfg_attr(not(any(test, feature = "std")), no_std)]

extern crate alloc;

pub mod annotation;
pub mod cascade;
pub mod classifiers;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod rng;

pub use error::{Error, Result};
