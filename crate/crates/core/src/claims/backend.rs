use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use serde_json::json;

use super::{build_prompt, normalize, parse_claims, ClaimError, ExtractorBackend, ExtractorConfig};
use crate::document::{Claim, Summary};

pub trait ClaimExtractor: Send + Sync {
    fn extract(&self, summary: &Summary) -> Result<Vec<Claim>, ClaimError>;

    /// Stable description used to key score caches.
    fn describe(&self) -> String;
}

pub fn build_extractor(config: &ExtractorConfig) -> Result<Box<dyn ClaimExtractor>, ClaimError> {
    config.validate()?;
    Ok(match config.backend {
        ExtractorBackend::Sentences => Box::new(SentenceExtractor),
        ExtractorBackend::FileCache => Box::new(FileCacheExtractor::load(&config.endpoint)?),
        ExtractorBackend::RemoteLlm => Box::new(RemoteLlmExtractor::new(config.clone())?),
        ExtractorBackend::LocalSeq2seq => Box::new(Seq2SeqExtractor::new(config.clone())),
    })
}

/// Uses the summary's sentences as its claims.
#[derive(Debug, Clone, Copy, Default)]
pub struct SentenceExtractor;

impl ClaimExtractor for SentenceExtractor {
    fn extract(&self, summary: &Summary) -> Result<Vec<Claim>, ClaimError> {
        normalize(
            summary.sentences.iter().map(|s| s.text.as_str()),
            &summary.id,
        )
    }

    fn describe(&self) -> String {
        "sentences".to_string()
    }
}

/// Serves claims from a JSON object mapping summary id to claim strings.
#[derive(Debug, Clone, Default)]
pub struct FileCacheExtractor {
    source: String,
    entries: HashMap<String, Vec<String>>,
}

impl FileCacheExtractor {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClaimError> {
        let path = path.as_ref();
        let bad = |message: String| ClaimError::CacheFile {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
        let entries: IndexMap<String, Vec<String>> =
            serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        Ok(FileCacheExtractor {
            source: path.display().to_string(),
            entries: entries.into_iter().collect(),
        })
    }

    pub fn from_entries(entries: HashMap<String, Vec<String>>) -> Self {
        FileCacheExtractor {
            source: "<memory>".to_string(),
            entries,
        }
    }
}

impl ClaimExtractor for FileCacheExtractor {
    fn extract(&self, summary: &Summary) -> Result<Vec<Claim>, ClaimError> {
        let stored = self
            .entries
            .get(&summary.id)
            .ok_or_else(|| ClaimError::CacheMiss {
                summary_id: summary.id.clone(),
            })?;
        normalize(stored, &summary.id)
    }

    fn describe(&self) -> String {
        format!("file-cache({})", self.source)
    }
}

/// Counting semaphore bounding concurrent remote requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(n: usize) -> Self {
        Gate {
            free: Mutex::new(n),
            cv: Condvar::new(),
        }
    }

    fn enter(&self) -> GateGuard<'_> {
        let mut free = self.free.lock().expect("gate lock poisoned");
        while *free == 0 {
            free = self.cv.wait(free).expect("gate lock poisoned");
        }
        *free -= 1;
        GateGuard(self)
    }
}

struct GateGuard<'a>(&'a Gate);

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("gate lock poisoned") += 1;
        self.0.cv.notify_one();
    }
}

fn backoff(attempt: u32) -> Duration {
    Duration::from_millis((50u64 << attempt.min(5)).min(2000))
}

enum Failure {
    Retryable(String),
    Fatal(String),
}

/// Chat-completion client sending the rendered prompt as one user message.
pub struct RemoteLlmExtractor {
    config: ExtractorConfig,
    client: reqwest::blocking::Client,
    gate: Gate,
}

impl RemoteLlmExtractor {
    pub fn new(config: ExtractorConfig) -> Result<Self, ClaimError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ClaimError::InvalidConfig(e.to_string()))?;
        let gate = Gate::new(config.max_in_flight);
        Ok(RemoteLlmExtractor {
            config,
            client,
            gate,
        })
    }

    fn attempt(&self, body: &serde_json::Value) -> Result<String, Failure> {
        let _slot = self.gate.enter();
        let mut request = self.client.post(&self.config.endpoint).json(body);
        if let Some(var) = &self.config.api_key_env {
            if let Ok(key) = std::env::var(var) {
                request = request.bearer_auth(key);
            }
        }
        let response = request
            .send()
            .map_err(|e| Failure::Retryable(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| Failure::Retryable(e.to_string()))?;
        tracing::debug!(status = status.as_u16(), body = %text, authorization = "<redacted>", "claim extractor response");
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(Failure::Retryable(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(Failure::Fatal(format!("HTTP {status}: {text}")));
        }
        let v: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Fatal(format!("bad response: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(|c| c.as_str())
            .map(str::to_string)
            .ok_or_else(|| Failure::Fatal("response has no choices[0].message.content".into()))
    }
}

impl ClaimExtractor for RemoteLlmExtractor {
    fn extract(&self, summary: &Summary) -> Result<Vec<Claim>, ClaimError> {
        let prompt = build_prompt(summary);
        let body = json!({
            "model": self.config.model,
            "messages": [{ "role": "user", "content": prompt.rendered }],
            "temperature": self.config.temperature,
            "max_tokens": self.config.max_tokens,
        });
        tracing::debug!(summary = %summary.id, body = %body, authorization = "<redacted>", "claim extractor request");
        let attempts = self.config.max_retries + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                thread::sleep(backoff(attempt - 1));
            }
            match self.attempt(&body) {
                Ok(content) => return parse_claims(&content, &summary.id),
                Err(Failure::Fatal(message)) => {
                    return Err(ClaimError::Backend {
                        summary_id: summary.id.clone(),
                        message,
                    })
                }
                Err(Failure::Retryable(message)) => {
                    tracing::debug!(summary = %summary.id, attempt = attempt + 1, error = %message, "claim extraction attempt failed");
                    last_error = message;
                }
            }
        }
        Err(ClaimError::ExtractorUnavailable {
            summary_id: summary.id.clone(),
            attempts,
            last_error,
        })
    }

    fn describe(&self) -> String {
        format!(
            "remote-llm({}, model={}, temperature={}, max_tokens={}, template={})",
            self.config.endpoint,
            self.config.model,
            self.config.temperature,
            self.config.max_tokens,
            super::TEMPLATE_ID
        )
    }
}

/// Runs a local model command per summary: summary text on stdin, claims
/// JSON on stdout.
pub struct Seq2SeqExtractor {
    config: ExtractorConfig,
}

impl Seq2SeqExtractor {
    pub fn new(config: ExtractorConfig) -> Self {
        Seq2SeqExtractor { config }
    }

    fn run_once(&self, input: &str) -> Result<String, String> {
        let mut parts = self.config.endpoint.split_whitespace();
        let program = parts.next().ok_or("empty command")?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| format!("cannot start '{program}': {e}"))?;
        let mut stdin = child.stdin.take().expect("piped stdin");
        let input = input.to_string();
        let writer = thread::spawn(move || {
            let _ = stdin.write_all(input.as_bytes());
        });
        let mut stdout = child.stdout.take().expect("piped stdout");
        let reader = thread::spawn(move || {
            let mut out = String::new();
            let _ = stdout.read_to_string(&mut out);
            out
        });
        let deadline = Instant::now() + self.config.timeout;
        let status = loop {
            match child.try_wait().map_err(|e| e.to_string())? {
                Some(status) => break status,
                None if Instant::now() >= deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(format!("timed out after {:?}", self.config.timeout));
                }
                None => thread::sleep(Duration::from_millis(5)),
            }
        };
        let _ = writer.join();
        let out = reader.join().unwrap_or_default();
        if !status.success() {
            return Err(format!("exited with {status}"));
        }
        Ok(out)
    }
}

impl ClaimExtractor for Seq2SeqExtractor {
    fn extract(&self, summary: &Summary) -> Result<Vec<Claim>, ClaimError> {
        let attempts = self.config.max_retries + 1;
        let mut last_error = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                thread::sleep(backoff(attempt - 1));
            }
            match self.run_once(&summary.text) {
                Ok(out) => return parse_claims(&out, &summary.id),
                Err(e) => last_error = e,
            }
        }
        Err(ClaimError::ExtractorUnavailable {
            summary_id: summary.id.clone(),
            attempts,
            last_error,
        })
    }

    fn describe(&self) -> String {
        format!("local-seq2seq({})", self.config.endpoint)
    }
}
