//! Build word co-occurrence networks (WCN) and word similarity networks
//! (WSN) from tokenized text corpora, and analyze their structure.
//!
//! The pipeline: ingest a pre-segmented corpus and normalize it
//! ([`corpus`]), train skip-gram negative-sampling embeddings
//! ([`embedding`]), build co-occurrence or similarity graphs ([`graph`]),
//! then compute the structural diagnostics — degree-distribution model
//! selection (power law vs. two-regime power law by AIC), small-worldness
//! against the Erdős–Rényi baseline, and degree assortativity
//! ([`netstats`]).
//!
//! Every randomized step (vocabulary sampling, embedding initialization and
//! negative sampling, threshold estimation, the [`generate`] reference
//! graphs) is driven by a seeded ChaCha8 generator, so single-threaded runs
//! are reproducible bit for bit.

pub mod corpus;
pub mod embedding;
pub mod error;
pub mod generate;
pub mod graph;
pub mod netstats;

pub use error::{Error, Result};
