//! End-to-end scoring: coreference, claim extraction and scoring for
//! (document, summary) pairs.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::json;
use tracing::warn;

use crate::benchmark::{BenchmarkRecord, RecordScorer};
use crate::claims::{ClaimError, ClaimExtractor};
use crate::config::{CorefKind, RunConfig};
use crate::coref::CorefResolver;
use crate::document::{Claim, Document, Summary};
use crate::error::{Error, Result};
use crate::nli::EntailmentBackend;
use crate::scoring::{score_summary_ablation, FactualityReport, ScoringMode, ScoringParams};

pub struct Pipeline {
    extractor: Box<dyn ClaimExtractor>,
    backend: Arc<dyn EntailmentBackend>,
    coref: Box<dyn CorefResolver>,
    coref_kind: CorefKind,
    coref_max_chars: Option<usize>,
    params: ScoringParams,
    mode: ScoringMode,
}

impl Pipeline {
    pub fn new(
        extractor: Box<dyn ClaimExtractor>,
        backend: Arc<dyn EntailmentBackend>,
        coref: Box<dyn CorefResolver>,
        params: ScoringParams,
        mode: ScoringMode,
    ) -> Self {
        Pipeline {
            extractor,
            backend,
            coref,
            coref_kind: CorefKind::Rule,
            coref_max_chars: None,
            params,
            mode,
        }
    }

    pub fn from_config(config: &RunConfig) -> Result<Self> {
        Ok(Pipeline {
            extractor: config.extractor()?,
            backend: config.nli_backend()?,
            coref: config.coref_resolver(),
            coref_kind: config.coref.backend,
            coref_max_chars: config.coref.max_chars,
            params: config.params(),
            mode: config.scoring.mode,
        })
    }

    /// How documents get their clusters: `Rule` resolves documents that
    /// arrive without clusters, `Precomputed` uses input clusters only and
    /// `None` drops them.
    pub fn with_coref_kind(mut self, kind: CorefKind) -> Self {
        self.coref_kind = kind;
        self
    }

    pub fn with_coref_max_chars(mut self, max_chars: Option<usize>) -> Self {
        self.coref_max_chars = max_chars;
        self
    }

    pub fn backend(&self) -> &dyn EntailmentBackend {
        self.backend.as_ref()
    }

    pub fn mode(&self) -> ScoringMode {
        self.mode
    }

    fn uses_coref(&self) -> bool {
        matches!(self.mode, ScoringMode::Fenice | ScoringMode::NliCoref)
    }

    /// Attach coreference clusters according to the coref setting. Modes
    /// that never read clusters leave the document untouched.
    pub fn prepare(&self, doc: Document) -> Document {
        if !self.uses_coref() {
            return doc;
        }
        match self.coref_kind {
            CorefKind::None => {
                let status = doc.coref_status;
                doc.with_coref(Vec::new(), status)
                    .expect("dropping clusters cannot invalidate a document")
            }
            CorefKind::Precomputed => doc,
            CorefKind::Rule if doc.coref_status == crate::document::CorefStatus::NotRun => {
                doc.resolve_coref(self.coref.as_ref(), self.coref_max_chars)
            }
            CorefKind::Rule => doc,
        }
    }

    /// Claims for `summary`; an empty extraction falls back to the summary's
    /// sentences and reports `true`.
    pub fn claims(&self, summary: &Summary) -> Result<(Vec<Claim>, bool)> {
        if self.mode == ScoringMode::NliSent {
            return Ok((Vec::new(), false));
        }
        match self.extractor.extract(summary) {
            Ok(claims) => Ok((claims, false)),
            Err(ClaimError::EmptyClaims { summary_id }) => {
                warn!(summary_id = %summary_id, "no claims extracted; scoring summary sentences instead");
                Ok((summary.sentence_claims(), true))
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Score one pair; `doc` should already have passed through
    /// [`Pipeline::prepare`].
    pub fn score(&self, doc: &Document, summary: &Summary) -> Result<FactualityReport> {
        if summary.document_id != doc.id {
            return Err(Error::MissingDocument {
                summary_id: summary.id.clone(),
                document_id: summary.document_id.clone(),
            });
        }
        let (claims, fallback) = self.claims(summary)?;
        let mut report = score_summary_ablation(
            doc,
            summary,
            &claims,
            self.mode,
            self.backend.as_ref(),
            &self.params,
        )?;
        report.claims_fallback = fallback;
        Ok(report)
    }

    /// Score every summary against its document, in parallel; results keep
    /// summary order. A summary naming an unknown document yields
    /// `Error::MissingDocument` in its slot.
    pub fn score_all(
        &self,
        documents: Vec<Document>,
        summaries: &[Summary],
    ) -> Vec<Result<FactualityReport>> {
        let wanted: std::collections::HashSet<&str> =
            summaries.iter().map(|s| s.document_id.as_str()).collect();
        let prepared: HashMap<String, Document> = documents
            .into_par_iter()
            .filter(|d| wanted.contains(d.id.as_str()))
            .map(|d| (d.id.clone(), self.prepare(d)))
            .collect();
        summaries
            .par_iter()
            .map(|s| match prepared.get(&s.document_id) {
                Some(doc) => self.score(doc, s),
                None => Err(Error::MissingDocument {
                    summary_id: s.id.clone(),
                    document_id: s.document_id.clone(),
                }),
            })
            .collect()
    }

    /// Everything that affects scores, as a stable JSON string.
    pub fn describe(&self) -> String {
        json!({
            "mode": self.mode.to_string(),
            "params": self.params,
            "nli": self.backend.describe(),
            "claims": if self.mode == ScoringMode::NliSent { "none".to_string() } else { self.extractor.describe() },
            "coref": if self.uses_coref() {
                format!("{}:{}:{:?}", self.coref_kind, self.coref.describe(), self.coref_max_chars)
            } else {
                "none".to_string()
            },
        })
        .to_string()
    }
}

impl RecordScorer for Pipeline {
    fn score(&self, record: &BenchmarkRecord) -> Result<f64> {
        let doc = self.prepare(record.document.clone());
        Ok(Pipeline::score(self, &doc, &record.summary)?.score)
    }

    fn cache_key(&self) -> String {
        self.describe()
    }
}
