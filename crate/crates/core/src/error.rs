use thiserror::Error;

use crate::benchmark::BenchmarkError;
use crate::claim_eval::ClaimEvalError;
use crate::claims::ClaimError;
use crate::document::DocumentError;
use crate::nli::NliError;
use crate::scoring::ScoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error for pipeline and CLI code paths.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error(transparent)]
    Claims(#[from] ClaimError),
    #[error(transparent)]
    Nli(#[from] NliError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    ClaimEval(#[from] ClaimEvalError),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("summary '{summary_id}' references unknown document '{document_id}'")]
    MissingDocument {
        summary_id: String,
        document_id: String,
    },
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

/// Process exit codes used by the CLI.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const INPUT: i32 = 2;
    pub const BACKEND: i32 = 3;
    pub const DEGENERATE_LABELS: i32 = 4;
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Short machine-readable kind, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Document(_) => "document",
            Error::Claims(e) => match e {
                ClaimError::ExtractorUnavailable { .. } => "extractor_unavailable",
                ClaimError::MalformedClaimOutput { .. } => "malformed_claim_output",
                ClaimError::EmptyClaims { .. } => "empty_claims",
                _ => "claims",
            },
            Error::Nli(NliError::OversizedPremise { .. }) => "oversized_premise",
            Error::Nli(_) => "nli_backend",
            Error::Score(ScoreError::Nli(NliError::OversizedPremise { .. })) => "oversized_premise",
            Error::Score(ScoreError::Nli(_)) => "nli_backend",
            Error::Score(_) => "scoring",
            Error::ClaimEval(_) => "claim_eval",
            Error::Benchmark(BenchmarkError::DegenerateLabels { .. }) => "degenerate_labels",
            Error::Benchmark(BenchmarkError::Scorer { source, .. }) => source.kind(),
            Error::Benchmark(_) => "benchmark",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::MissingDocument { .. } => "missing_document",
            Error::Context { source, .. } => source.kind(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Nli(_) => exit_code::BACKEND,
            Error::Score(ScoreError::Nli(_)) => exit_code::BACKEND,
            Error::Document(DocumentError::CorefBackend(_)) => exit_code::BACKEND,
            Error::Claims(ClaimError::ExtractorUnavailable { .. }) => exit_code::BACKEND,
            Error::Claims(ClaimError::Backend { .. }) => exit_code::BACKEND,
            Error::Benchmark(BenchmarkError::DegenerateLabels { .. }) => {
                exit_code::DEGENERATE_LABELS
            }
            Error::Benchmark(BenchmarkError::Nli(_)) => exit_code::BACKEND,
            Error::Benchmark(BenchmarkError::Scorer { source, .. }) => source.exit_code(),
            Error::Context { source, .. } => source.exit_code(),
            _ => exit_code::INPUT,
        }
    }
}
