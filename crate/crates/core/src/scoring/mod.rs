//! Claim scoring and summary aggregation.
//!
//! A claim is scored against the source document in stages: the best single
//! sentence, then that sentence rewritten with coreferent mentions, and, when
//! the result stays below the gating threshold, windows of `j` consecutive
//! sentences and the whole document. A summary's score is the mean of its
//! claim scores.

mod engine;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nli::NliError;

pub use engine::{
    coref_variants, nli_score, score_claim, score_coref, score_multi, score_sentences,
    score_summary, score_summary_ablation, score_window, CorefAlignment, CorefVariant,
    MultiAlignment, SentenceAlignment, WindowAlignment,
};
pub use report::{
    AlignedSpan, ChunkedPremise, ClaimVerdict, Diagnostics, FactualityReport, Granularity, Stage,
    SubScores, Substitution,
};

pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_THRESHOLD: f64 = 0.8;
pub const DEFAULT_MAX_COREF_VARIANTS: usize = 20;

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error(transparent)]
    Nli(#[from] NliError),
    #[error("summary '{0}' has no claims to score")]
    NoClaims(String),
    #[error("invalid scoring parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringParams {
    /// Window length in sentences.
    pub j: usize,
    /// Coreference-stage score at or above which coarser premises are skipped.
    #[serde(rename = "T")]
    pub threshold: f64,
    pub max_coref_variants: usize,
    /// Take the max of the coreference and multi-granularity scores below the
    /// threshold instead of replacing the former with the latter.
    #[serde(default)]
    pub monotone_gate: bool,
}

impl Default for ScoringParams {
    fn default() -> Self {
        ScoringParams {
            j: DEFAULT_WINDOW,
            threshold: DEFAULT_THRESHOLD,
            max_coref_variants: DEFAULT_MAX_COREF_VARIANTS,
            monotone_gate: false,
        }
    }
}

impl ScoringParams {
    pub fn validate(&self) -> Result<(), ScoreError> {
        if self.j < 1 {
            return Err(ScoreError::InvalidParams("j must be at least 1".into()));
        }
        if !(-1.0..=1.0).contains(&self.threshold) {
            return Err(ScoreError::InvalidParams(format!(
                "T must lie in [-1, 1], got {}",
                self.threshold
            )));
        }
        if self.max_coref_variants < 1 {
            return Err(ScoreError::InvalidParams(
                "max_coref_variants must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Full metric or one of the reduced baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringMode {
    /// Claims, coreference rewriting, windows and document, gated.
    Fenice,
    /// Summary sentences as hypotheses, best single document sentence.
    NliSent,
    /// Claims as hypotheses, best single document sentence.
    NliClaim,
    /// As `NliClaim` plus coreference rewriting of the best sentence.
    NliCoref,
}

impl FromStr for ScoringMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fenice" | "full" => Ok(ScoringMode::Fenice),
            "nli_sent" => Ok(ScoringMode::NliSent),
            "nli_claim" => Ok(ScoringMode::NliClaim),
            "nli_coref" => Ok(ScoringMode::NliCoref),
            other => Err(format!(
                "unknown mode '{other}' (expected fenice, nli_sent, nli_claim or nli_coref)"
            )),
        }
    }
}

impl fmt::Display for ScoringMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoringMode::Fenice => "fenice",
            ScoringMode::NliSent => "nli_sent",
            ScoringMode::NliClaim => "nli_claim",
            ScoringMode::NliCoref => "nli_coref",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let p = ScoringParams::default();
        assert_eq!((p.j, p.threshold, p.max_coref_variants), (5, 0.8, 20));
        assert!(p.validate().is_ok());
    }

    #[test]
    fn invalid_params() {
        let bad = |f: fn(&mut ScoringParams)| {
            let mut p = ScoringParams::default();
            f(&mut p);
            p.validate().is_err()
        };
        assert!(bad(|p| p.j = 0));
        assert!(bad(|p| p.threshold = 1.5));
        assert!(bad(|p| p.threshold = f64::NAN));
        assert!(bad(|p| p.max_coref_variants = 0));
    }

    #[test]
    fn params_serialize_threshold_as_t() {
        let v = serde_json::to_value(ScoringParams::default()).unwrap();
        assert_eq!(v["T"], 0.8);
        assert_eq!(v["j"], 5);
    }

    #[test]
    fn mode_names() {
        for m in [
            ScoringMode::Fenice,
            ScoringMode::NliSent,
            ScoringMode::NliClaim,
            ScoringMode::NliCoref,
        ] {
            assert_eq!(m.to_string().parse::<ScoringMode>().unwrap(), m);
        }
    }
}
