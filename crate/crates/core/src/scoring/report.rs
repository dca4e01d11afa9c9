use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use super::ScoringParams;
use crate::document::{Claim, CorefStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Sentence,
    CorefSentence,
    Window,
    Document,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Sentence,
    Coref,
    MultiGranularity,
}

/// One mention of the aligned sentence replaced by a coreferent surface form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Substitution {
    /// Sentence-local character span of the replaced mention.
    pub mention_start: usize,
    pub mention_end: usize,
    pub original: String,
    pub replacement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedSpan {
    pub granularity: Granularity,
    pub sentence_start: usize,
    /// Inclusive.
    pub sentence_end: usize,
    pub premise_text: String,
    #[serde(default)]
    pub substitution: Option<Substitution>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubScores {
    #[serde(serialize_with = "fixed6")]
    pub sentence: f64,
    #[serde(
        default,
        serialize_with = "fixed6_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub coref: Option<f64>,
    #[serde(
        default,
        serialize_with = "fixed6_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub window: Option<f64>,
    #[serde(
        default,
        serialize_with = "fixed6_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub document: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimVerdict {
    pub claim: Claim,
    #[serde(serialize_with = "fixed6")]
    pub score: f64,
    pub stage: Stage,
    pub aligned: AlignedSpan,
    pub sub_scores: SubScores,
}

/// A document-level premise that exceeded the backend budget and was scored
/// as overlapping chunks; records the winning chunk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkedPremise {
    pub claim_index: usize,
    pub chunk_start: usize,
    pub chunk_end: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coref_truncated_at: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub coref_unavailable: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chunked_document: Vec<ChunkedPremise>,
}

impl Diagnostics {
    pub fn is_empty(&self) -> bool {
        self == &Diagnostics::default()
    }

    pub(crate) fn from_coref(status: CorefStatus) -> Self {
        Diagnostics {
            coref_truncated_at: match status {
                CorefStatus::Truncated { chars } => Some(chars),
                _ => None,
            },
            coref_unavailable: status == CorefStatus::Unavailable,
            chunked_document: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactualityReport {
    pub summary_id: String,
    #[serde(serialize_with = "fixed6")]
    pub score: f64,
    pub verdicts: Vec<ClaimVerdict>,
    pub claims_fallback: bool,
    pub params: ScoringParams,
    #[serde(default, skip_serializing_if = "Diagnostics::is_empty")]
    pub diagnostics: Diagnostics,
}

impl FactualityReport {
    /// One-line JSON, as written to report files.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Render with exactly six decimals.
pub(crate) fn format_fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

pub(crate) fn fixed6<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    let raw = RawValue::from_string(format_fixed6(*x)).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

fn fixed6_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => fixed6(v, s),
        None => s.serialize_none(),
    }
}
