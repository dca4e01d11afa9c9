//! Source documents, summaries and claims.
//!
//! All offsets are character (Unicode scalar) offsets and all spans are
//! half-open `[start, end)`. Sentence offsets index into the owning text;
//! coreference mention offsets are local to the mention's sentence.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coref::CorefResolver;
use crate::segment::Segmenter;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("document is empty or whitespace-only")]
    EmptyDocument,
    #[error("summary '{0}' has empty text")]
    EmptySummary(String),
    #[error("invalid sentence span {start}..{end} at position {index}: {reason}")]
    InvalidSentence {
        index: usize,
        start: usize,
        end: usize,
        reason: &'static str,
    },
    #[error("invalid coreference mention (sentence {sentence_index}, {start}..{end}): {reason}")]
    InvalidMention {
        sentence_index: usize,
        start: usize,
        end: usize,
        reason: &'static str,
    },
    #[error("coreference backend failed: {0}")]
    CorefBackend(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub sentence_index: usize,
    /// Sentence-local character offset.
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefCluster {
    pub mentions: Vec<Mention>,
}

/// How the coreference clusters attached to a document were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CorefStatus {
    #[default]
    NotRun,
    Complete,
    /// Only the first `chars` characters were visible to the resolver.
    Truncated {
        chars: usize,
    },
    /// The backend failed; the document carries no clusters.
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub sentences: Vec<Sentence>,
    pub coref_clusters: Vec<CorefCluster>,
    #[serde(default)]
    pub coref_status: CorefStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub id: String,
    pub document_id: String,
    pub text: String,
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Claim {
    pub summary_id: String,
    pub index: usize,
    pub text: String,
}

impl Claim {
    pub fn new(summary_id: impl Into<String>, index: usize, text: impl Into<String>) -> Self {
        Claim {
            summary_id: summary_id.into(),
            index,
            text: text.into(),
        }
    }
}

/// Byte position of every char boundary in `text`, plus `text.len()` at the end.
pub(crate) fn char_boundaries(text: &str) -> Vec<usize> {
    text.char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(text.len()))
        .collect()
}

/// Slice `text` by character offsets. Returns `None` when out of range.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut iter = text
        .char_indices()
        .map(|(b, _)| b)
        .chain(std::iter::once(text.len()));
    let s = iter.nth(start)?;
    let e = if end == start {
        s
    } else {
        iter.nth(end - start - 1)?
    };
    Some(&text[s..e])
}

/// Validate `(start, end)` character spans against `text` and build sentences.
fn build_sentences(text: &str, spans: &[(usize, usize)]) -> Result<Vec<Sentence>, DocumentError> {
    let bounds = char_boundaries(text);
    let n_chars = bounds.len() - 1;
    let mut prev_end = 0;
    let mut out = Vec::with_capacity(spans.len());
    for (index, &(start, end)) in spans.iter().enumerate() {
        let bad = |reason| DocumentError::InvalidSentence {
            index,
            start,
            end,
            reason,
        };
        if start >= end {
            return Err(bad("empty or inverted span"));
        }
        if end > n_chars {
            return Err(bad("span exceeds text length"));
        }
        if start < prev_end {
            return Err(bad("overlaps or precedes the previous sentence"));
        }
        let text = &text[bounds[start]..bounds[end]];
        if text.trim().is_empty() {
            return Err(bad("whitespace-only sentence"));
        }
        out.push(Sentence {
            index,
            start,
            end,
            text: text.to_string(),
        });
        prev_end = end;
    }
    Ok(out)
}

impl Document {
    /// Segment `text` with `segmenter`; no coreference clusters attached.
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        segmenter: &dyn Segmenter,
    ) -> Result<Self, DocumentError> {
        let text = text.into();
        let sentences = segmenter.segment(&text)?;
        Ok(Document {
            id: id.into(),
            text,
            sentences,
            coref_clusters: Vec::new(),
            coref_status: CorefStatus::NotRun,
        })
    }

    /// Build from precomputed character spans.
    pub fn from_spans(
        id: impl Into<String>,
        text: impl Into<String>,
        spans: &[(usize, usize)],
    ) -> Result<Self, DocumentError> {
        let text = text.into();
        if text.trim().is_empty() || spans.is_empty() {
            return Err(DocumentError::EmptyDocument);
        }
        let sentences = build_sentences(&text, spans)?;
        Ok(Document {
            id: id.into(),
            text,
            sentences,
            coref_clusters: Vec::new(),
            coref_status: CorefStatus::NotRun,
        })
    }

    /// Join `sentences` with single spaces; handy for fixtures.
    pub fn from_sentences<S: AsRef<str>>(
        id: impl Into<String>,
        sentences: &[S],
    ) -> Result<Self, DocumentError> {
        let mut text = String::new();
        let mut spans = Vec::with_capacity(sentences.len());
        let mut pos = 0;
        for (i, s) in sentences.iter().enumerate() {
            if i > 0 {
                text.push(' ');
                pos += 1;
            }
            let s = s.as_ref();
            let n = s.chars().count();
            text.push_str(s);
            spans.push((pos, pos + n));
            pos += n;
        }
        Document::from_spans(id, text, &spans)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    /// Attach clusters, validating mentions and dropping singletons.
    pub fn with_coref(
        mut self,
        clusters: Vec<CorefCluster>,
        status: CorefStatus,
    ) -> Result<Self, DocumentError> {
        let mut kept = Vec::with_capacity(clusters.len());
        for cluster in clusters {
            for m in &cluster.mentions {
                self.check_mention(m)?;
            }
            if cluster.mentions.len() >= 2 {
                kept.push(cluster);
            }
        }
        self.coref_clusters = kept;
        self.coref_status = status;
        Ok(self)
    }

    /// Attach clusters given as document-level character offsets, as found in
    /// the JSONL input format.
    pub fn with_coref_document_offsets(
        self,
        clusters: &[Vec<(usize, usize, usize)>],
    ) -> Result<Self, DocumentError> {
        let mut converted = Vec::with_capacity(clusters.len());
        for cluster in clusters {
            let mut mentions = Vec::with_capacity(cluster.len());
            for &(sentence_index, start, end) in cluster {
                let bad = |reason| DocumentError::InvalidMention {
                    sentence_index,
                    start,
                    end,
                    reason,
                };
                let sentence = self
                    .sentences
                    .get(sentence_index)
                    .ok_or_else(|| bad("sentence index out of range"))?;
                if start < sentence.start || end > sentence.end || start >= end {
                    return Err(bad("mention outside its sentence span"));
                }
                let (ls, le) = (start - sentence.start, end - sentence.start);
                let surface = char_slice(&sentence.text, ls, le)
                    .ok_or_else(|| bad("mention outside its sentence span"))?
                    .to_string();
                mentions.push(Mention {
                    sentence_index,
                    start: ls,
                    end: le,
                    surface,
                });
            }
            converted.push(CorefCluster { mentions });
        }
        self.with_coref(converted, CorefStatus::Complete)
    }

    fn check_mention(&self, m: &Mention) -> Result<(), DocumentError> {
        let bad = |reason| DocumentError::InvalidMention {
            sentence_index: m.sentence_index,
            start: m.start,
            end: m.end,
            reason,
        };
        let sentence = self
            .sentences
            .get(m.sentence_index)
            .ok_or_else(|| bad("sentence index out of range"))?;
        if m.start >= m.end {
            return Err(bad("empty or inverted span"));
        }
        match char_slice(&sentence.text, m.start, m.end) {
            Some(s) if s == m.surface => Ok(()),
            Some(_) => Err(bad("surface does not match covered text")),
            None => Err(bad("mention outside its sentence span")),
        }
    }

    /// Run `resolver` and attach its clusters.
    ///
    /// With `max_chars`, the resolver only sees sentences ending within that
    /// many characters and the status records the truncation. A backend
    /// failure leaves the document without clusters (status `Unavailable`).
    pub fn resolve_coref(self, resolver: &dyn CorefResolver, max_chars: Option<usize>) -> Self {
        let total = self.text.chars().count();
        let (visible, status) = match max_chars {
            Some(limit) if total > limit => {
                let visible: Vec<Sentence> = self
                    .sentences
                    .iter()
                    .filter(|s| s.end <= limit)
                    .cloned()
                    .collect();
                (visible, CorefStatus::Truncated { chars: limit })
            }
            _ => (self.sentences.clone(), CorefStatus::Complete),
        };
        match resolver.clusters(&visible) {
            Ok(clusters) => match self.clone().with_coref(clusters, status) {
                Ok(doc) => doc,
                Err(e) => {
                    tracing::warn!(document = %self.id, error = %e, "coreference output rejected");
                    self.without_coref()
                }
            },
            Err(e) => {
                tracing::warn!(document = %self.id, error = %e, "coreference unavailable");
                self.without_coref()
            }
        }
    }

    fn without_coref(mut self) -> Self {
        self.coref_clusters.clear();
        self.coref_status = CorefStatus::Unavailable;
        self
    }
}

impl Summary {
    pub fn new(
        id: impl Into<String>,
        document_id: impl Into<String>,
        text: impl Into<String>,
        segmenter: &dyn Segmenter,
    ) -> Result<Self, DocumentError> {
        let id = id.into();
        let text = text.into();
        if text.trim().is_empty() {
            return Err(DocumentError::EmptySummary(id));
        }
        let sentences = segmenter.segment(&text)?;
        Ok(Summary {
            id,
            document_id: document_id.into(),
            text,
            sentences,
        })
    }

    /// The summary sentences as claims, used by the sentence-level baseline
    /// and the empty-claims fallback.
    pub fn sentence_claims(&self) -> Vec<Claim> {
        self.sentences
            .iter()
            .enumerate()
            .map(|(i, s)| Claim::new(self.id.clone(), i, s.text.trim()))
            .collect()
    }
}
