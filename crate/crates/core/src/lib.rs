//! Claim-level factuality scoring for summaries.
//!
//! A summary is split into atomic claims; each claim is aligned against the
//! source document with an entailment backend at sentence, coreference-
//! rewritten sentence, window and whole-document granularity, and the
//! summary score is the mean claim score. The crate also carries the
//! claim-extraction quality metrics, a threshold-tuning benchmark harness
//! and the `claimfact` command line.

pub mod benchmark;
pub mod claim_eval;
pub mod claims;
pub mod cli;
pub mod config;
pub mod coref;
pub mod document;
pub mod error;
pub mod io;
pub mod nli;
pub mod pipeline;
pub mod scoring;
pub mod segment;
pub mod store;
pub mod text;

#[cfg(test)]
mod testutil;

pub use document::{Claim, CorefCluster, Document, Mention, Sentence, Summary};
pub use error::{Error, Result};
pub use pipeline::Pipeline;
pub use scoring::{FactualityReport, ScoringMode, ScoringParams};
