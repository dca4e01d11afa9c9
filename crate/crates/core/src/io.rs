//! JSONL ingestion and report writing.
//!
//! Documents: `{"id", "text"}`, optionally with precomputed
//! `"sentences": [{"start", "end"}]` and
//! `"coref_clusters": [[{"sentence_index", "start", "end"}]]`, all in
//! document-level character offsets.
//!
//! Summaries: `{"id", "document_id", "text"}`.
//!
//! Benchmark records: `{"record_id", "document", "summary", "gold_label",
//! "system", "dataset", "split"}` where `document` and `summary` are either
//! plain text or objects in the formats above.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::benchmark::{BenchmarkRecord, Label, Split};
use crate::claim_eval::ClaimSetRecord;
use crate::document::{Document, DocumentError, Summary};
use crate::error::{Error, Result};
use crate::segment::Segmenter;

#[derive(Debug, Clone, Copy, Deserialize)]
struct SpanLine {
    start: usize,
    end: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct MentionLine {
    sentence_index: usize,
    start: usize,
    end: usize,
}

#[derive(Debug, Clone, Deserialize)]
struct DocumentLine {
    #[serde(default)]
    id: Option<String>,
    text: String,
    #[serde(default)]
    sentences: Option<Vec<SpanLine>>,
    #[serde(default)]
    coref_clusters: Option<Vec<Vec<MentionLine>>>,
}

impl DocumentLine {
    fn into_document(
        self,
        fallback_id: Option<&str>,
        segmenter: &dyn Segmenter,
    ) -> std::result::Result<Document, String> {
        let id = self
            .id
            .or_else(|| fallback_id.map(str::to_string))
            .ok_or("missing field `id`")?;
        let doc = match &self.sentences {
            Some(spans) => {
                let spans: Vec<(usize, usize)> = spans.iter().map(|s| (s.start, s.end)).collect();
                Document::from_spans(id, self.text, &spans)
            }
            None => Document::new(id, self.text, segmenter),
        }
        .map_err(|e| e.to_string())?;
        match self.coref_clusters {
            Some(clusters) => {
                let clusters: Vec<Vec<(usize, usize, usize)>> = clusters
                    .iter()
                    .map(|c| {
                        c.iter()
                            .map(|m| (m.sentence_index, m.start, m.end))
                            .collect()
                    })
                    .collect();
                doc.with_coref_document_offsets(&clusters)
                    .map_err(|e: DocumentError| e.to_string())
            }
            None => Ok(doc),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct SummaryLine {
    #[serde(default, alias = "summary_id")]
    id: Option<String>,
    #[serde(default)]
    document_id: Option<String>,
    text: String,
}

fn json_err(message: impl Into<String>) -> Error {
    Error::Parse {
        path: "<json>".into(),
        line: 1,
        message: message.into(),
    }
}

/// Parse one document object in the JSONL document format.
pub fn document_from_json(json: &str, segmenter: &dyn Segmenter) -> Result<Document> {
    let line: DocumentLine = serde_json::from_str(json).map_err(|e| json_err(e.to_string()))?;
    line.into_document(None, segmenter).map_err(json_err)
}

/// Parse one summary object; `document_id` may be omitted.
pub fn summary_from_json(json: &str, segmenter: &dyn Segmenter) -> Result<Summary> {
    let line: SummaryLine = serde_json::from_str(json).map_err(|e| json_err(e.to_string()))?;
    let id = line.id.ok_or_else(|| json_err("missing field `id`"))?;
    Summary::new(
        id,
        line.document_id.unwrap_or_default(),
        line.text,
        segmenter,
    )
    .map_err(|e| json_err(e.to_string()))
}

/// Deserialize every non-blank line of a JSONL file, tagging errors with the
/// 1-based line number.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let display = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(&display, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&display, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: display.clone(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push((i + 1, value));
    }
    Ok(out)
}

fn check_unique<'a>(
    path: &Path,
    seen: &mut HashSet<&'a str>,
    id: &'a str,
    line: usize,
    what: &str,
) -> Result<()> {
    if !seen.insert(id) {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line,
            message: format!("duplicate {what} id '{id}'"),
        });
    }
    Ok(())
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

pub fn read_documents(path: &Path, segmenter: &dyn Segmenter) -> Result<Vec<Document>> {
    let lines: Vec<(usize, DocumentLine)> = read_jsonl(path)?;
    let mut docs = Vec::with_capacity(lines.len());
    let mut lines_of = Vec::with_capacity(lines.len());
    for (line, d) in lines {
        docs.push(
            d.into_document(None, segmenter)
                .map_err(|m| parse_err(path, line, m))?,
        );
        lines_of.push(line);
    }
    let mut seen = HashSet::new();
    for (d, line) in docs.iter().zip(&lines_of) {
        check_unique(path, &mut seen, &d.id, *line, "document")?;
    }
    Ok(docs)
}

pub fn read_summaries(path: &Path, segmenter: &dyn Segmenter) -> Result<Vec<Summary>> {
    let lines: Vec<(usize, SummaryLine)> = read_jsonl(path)?;
    let mut out = Vec::with_capacity(lines.len());
    let mut line_numbers = Vec::with_capacity(lines.len());
    for (line, s) in lines {
        let id =
            s.id.ok_or_else(|| parse_err(path, line, "missing field `id`"))?;
        // claim extraction does not need the document reference
        let document_id = s.document_id.unwrap_or_default();
        out.push(
            Summary::new(id, document_id, s.text, segmenter)
                .map_err(|e| parse_err(path, line, e.to_string()))?,
        );
        line_numbers.push(line);
    }
    let mut seen = HashSet::new();
    for (s, line) in out.iter().zip(&line_numbers) {
        check_unique(path, &mut seen, &s.id, *line, "summary")?;
    }
    Ok(out)
}

pub fn read_claim_sets(path: &Path) -> Result<Vec<ClaimSetRecord>> {
    let lines: Vec<(usize, ClaimSetRecord)> = read_jsonl(path)?;
    let mut seen = HashSet::new();
    for (line, r) in &lines {
        check_unique(path, &mut seen, &r.summary_id, *line, "summary")?;
    }
    Ok(lines.into_iter().map(|(_, r)| r).collect())
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum TextOr<T> {
    Text(String),
    Object(T),
}

#[derive(Debug, Clone, Deserialize)]
struct RecordLine {
    record_id: String,
    document: TextOr<DocumentLine>,
    summary: TextOr<SummaryLine>,
    gold_label: Label,
    #[serde(default)]
    system: String,
    dataset: String,
    split: Split,
}

/// Benchmark records. Plain-text documents get id `<record_id>/document`;
/// plain-text summaries take the record id, which is therefore also the key
/// for claim caches.
pub fn read_benchmark(path: &Path, segmenter: &dyn Segmenter) -> Result<Vec<BenchmarkRecord>> {
    let lines: Vec<(usize, RecordLine)> = read_jsonl(path)?;
    let mut out = Vec::with_capacity(lines.len());
    let mut seen = HashSet::new();
    for (line, r) in &lines {
        check_unique(path, &mut seen, &r.record_id, *line, "record")?;
    }
    for (line, r) in lines {
        let err = |m: String| parse_err(path, line, format!("record '{}': {m}", r.record_id));
        let default_doc_id = format!("{}/document", r.record_id);
        let document = match r.document.clone() {
            TextOr::Text(text) => {
                Document::new(&default_doc_id, text, segmenter).map_err(|e| err(e.to_string()))?
            }
            TextOr::Object(d) => d
                .into_document(Some(&default_doc_id), segmenter)
                .map_err(&err)?,
        };
        let (sid, text, doc_ref) = match r.summary.clone() {
            TextOr::Text(text) => (r.record_id.clone(), text, None),
            TextOr::Object(s) => (
                s.id.unwrap_or_else(|| r.record_id.clone()),
                s.text,
                s.document_id,
            ),
        };
        if let Some(doc_ref) = doc_ref {
            if doc_ref != document.id {
                return Err(err(format!(
                    "summary references document '{doc_ref}' but the record's document is '{}'",
                    document.id
                )));
            }
        }
        let summary = Summary::new(sid, document.id.clone(), text, segmenter)
            .map_err(|e| err(e.to_string()))?;
        out.push(BenchmarkRecord {
            record_id: r.record_id,
            document,
            summary,
            gold_label: r.gold_label,
            system: r.system,
            dataset: r.dataset,
            split: r.split,
        });
    }
    Ok(out)
}

/// Write `contents` to `path`, or to stdout when `path` is `None` or `-`.
pub fn write_output(path: Option<&Path>, contents: &[u8]) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent)
                    .map_err(|e| Error::io(parent.display().to_string(), e))?;
            }
            let file = File::create(p).map_err(|e| Error::io(p.display().to_string(), e))?;
            let mut w = BufWriter::new(file);
            w.write_all(contents)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(p.display().to_string(), e))
        }
        _ => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(contents)
                .and_then(|_| lock.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}
