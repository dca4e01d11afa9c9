//! Claim extraction: prompt rendering, output parsing and extractor backends.

mod backend;
mod parse;
mod prompt;

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{Claim, Summary};

pub use backend::{
    build_extractor, ClaimExtractor, FileCacheExtractor, RemoteLlmExtractor, SentenceExtractor,
    Seq2SeqExtractor,
};
pub use parse::{normalize, parse_claims};
pub use prompt::{build_prompt, ClaimPrompt, INSTRUCTIONS, TEMPLATE_ID};

pub const MAX_RETRIES_LIMIT: u32 = 5;

#[derive(Debug, Error)]
pub enum ClaimError {
    #[error("summary '{summary_id}': extractor output is not a claims object and has no claim lines: {excerpt:?}")]
    MalformedClaimOutput { summary_id: String, excerpt: String },
    #[error("summary '{summary_id}': extractor returned no claims")]
    EmptyClaims { summary_id: String },
    #[error(
        "summary '{summary_id}': extractor unavailable after {attempts} attempts: {last_error}"
    )]
    ExtractorUnavailable {
        summary_id: String,
        attempts: u32,
        last_error: String,
    },
    #[error("summary '{summary_id}': no entry in claim cache")]
    CacheMiss { summary_id: String },
    #[error("summary '{summary_id}': extractor error: {message}")]
    Backend { summary_id: String, message: String },
    #[error("claim cache {path}: {message}")]
    CacheFile { path: String, message: String },
    #[error("invalid extractor configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExtractorBackend {
    /// Chat-completion endpoint driven by the extraction prompt.
    RemoteLlm,
    /// Local process reading a summary on stdin and writing claims JSON.
    LocalSeq2seq,
    /// JSON file mapping summary id to claims.
    FileCache,
    /// Summary sentences used as claims; no model involved.
    Sentences,
}

impl FromStr for ExtractorBackend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "remote-llm" | "remote" => Ok(ExtractorBackend::RemoteLlm),
            "local-seq2seq" | "local" => Ok(ExtractorBackend::LocalSeq2seq),
            "file-cache" | "cache" => Ok(ExtractorBackend::FileCache),
            "sentences" | "mock" => Ok(ExtractorBackend::Sentences),
            other => Err(format!(
                "unknown claim backend '{other}' (expected remote-llm, local-seq2seq, file-cache or sentences)"
            )),
        }
    }
}

impl fmt::Display for ExtractorBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExtractorBackend::RemoteLlm => "remote-llm",
            ExtractorBackend::LocalSeq2seq => "local-seq2seq",
            ExtractorBackend::FileCache => "file-cache",
            ExtractorBackend::Sentences => "sentences",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractorConfig {
    pub backend: ExtractorBackend,
    /// URL for `remote-llm`, command line for `local-seq2seq`, file path for
    /// `file-cache`; unused for `sentences`.
    pub endpoint: String,
    /// Model name sent to the remote endpoint.
    pub model: String,
    #[serde(with = "duration_secs")]
    pub timeout: Duration,
    pub max_retries: u32,
    /// Environment variable holding the API key for `remote-llm`.
    pub api_key_env: Option<String>,
    pub max_in_flight: usize,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            backend: ExtractorBackend::Sentences,
            endpoint: String::new(),
            model: "gpt-3.5-turbo".to_string(),
            timeout: Duration::from_secs(60),
            max_retries: 2,
            api_key_env: Some("OPENAI_API_KEY".to_string()),
            max_in_flight: 4,
            temperature: 0.0,
            max_tokens: 1024,
        }
    }
}

impl ExtractorConfig {
    pub fn validate(&self) -> Result<(), ClaimError> {
        if self.max_retries > MAX_RETRIES_LIMIT {
            return Err(ClaimError::InvalidConfig(format!(
                "max_retries must be at most {MAX_RETRIES_LIMIT}, got {}",
                self.max_retries
            )));
        }
        if self.timeout.is_zero() {
            return Err(ClaimError::InvalidConfig("timeout must be positive".into()));
        }
        if self.max_in_flight == 0 {
            return Err(ClaimError::InvalidConfig(
                "max_in_flight must be positive".into(),
            ));
        }
        let needs_endpoint = !matches!(self.backend, ExtractorBackend::Sentences);
        if needs_endpoint && self.endpoint.trim().is_empty() {
            return Err(ClaimError::InvalidConfig(format!(
                "backend {} needs an endpoint",
                self.backend
            )));
        }
        Ok(())
    }
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        if !secs.is_finite() || secs < 0.0 {
            return Err(serde::de::Error::custom(
                "timeout must be a non-negative number of seconds",
            ));
        }
        Ok(Duration::from_secs_f64(secs))
    }
}

/// Extract claims for one summary with a backend built from `config`.
pub fn extract_claims(
    summary: &Summary,
    config: &ExtractorConfig,
) -> Result<Vec<Claim>, ClaimError> {
    build_extractor(config)?.extract(summary)
}
