use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{
    validate_pairs, EntailmentBackend, EntailmentTriple, LabelOrder, NliError, PremiseBudget,
};

#[derive(Serialize)]
struct PairsRequest<'a> {
    pairs: Vec<[&'a str; 2]>,
}

#[derive(Deserialize)]
struct TriplesResponse {
    triples: Vec<Vec<f64>>,
    /// Optional label names in the order of each triple, as reported by the
    /// serving model. Overrides the configured order when present.
    #[serde(default)]
    labels: Option<Vec<String>>,
}

fn decode(
    response: TriplesResponse,
    expected: usize,
    configured: LabelOrder,
) -> Result<Vec<EntailmentTriple>, NliError> {
    if response.triples.len() != expected {
        return Err(NliError::backend(format!(
            "expected {expected} triples, got {}",
            response.triples.len()
        )));
    }
    let order = match &response.labels {
        Some(names) => LabelOrder::from_names(names).map_err(NliError::backend)?,
        None => configured,
    };
    response
        .triples
        .iter()
        .enumerate()
        .map(|(index, raw)| {
            order
                .to_triple(raw)
                .map_err(|message| NliError::InvalidTriple { index, message })
        })
        .collect()
}

/// HTTP backend: POSTs `{"pairs": [[premise, hypothesis], ...]}` and expects
/// `{"triples": [[p0, p1, p2], ...]}` with positions given by `label_order`.
pub struct RemoteBackend {
    url: String,
    client: reqwest::blocking::Client,
    label_order: LabelOrder,
    budget: Option<PremiseBudget>,
}

impl RemoteBackend {
    pub fn new(
        url: impl Into<String>,
        label_order: LabelOrder,
        budget: Option<PremiseBudget>,
        timeout: Duration,
    ) -> Result<Self, NliError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| NliError::backend(e.to_string()))?;
        Ok(RemoteBackend {
            url: url.into(),
            client,
            label_order,
            budget,
        })
    }
}

impl EntailmentBackend for RemoteBackend {
    fn entail_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<EntailmentTriple>, NliError> {
        validate_pairs(pairs, self.budget)?;
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        let body = PairsRequest {
            pairs: pairs.iter().map(|&(p, h)| [p, h]).collect(),
        };
        let response = self
            .client
            .post(&self.url)
            .json(&body)
            .send()
            .map_err(|e| NliError::backend(format!("{}: {e}", self.url)))?;
        let status = response.status();
        if !status.is_success() {
            return Err(NliError::backend(format!("{}: HTTP {status}", self.url)));
        }
        let parsed: TriplesResponse = response
            .json()
            .map_err(|e| NliError::backend(format!("{}: bad response body: {e}", self.url)))?;
        decode(parsed, pairs.len(), self.label_order)
    }

    fn budget(&self) -> Option<PremiseBudget> {
        self.budget
    }

    fn describe(&self) -> String {
        format!("remote({}, labels={})", self.url, self.label_order)
    }
}

struct ChildIo {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Long-running child process speaking the remote protocol as JSON lines on
/// stdin/stdout, one request line per batch. Used for local checkpoints
/// served by a sidecar; calls are serialized.
pub struct SubprocessBackend {
    description: String,
    io: Mutex<ChildIo>,
    label_order: LabelOrder,
    budget: Option<PremiseBudget>,
}

impl SubprocessBackend {
    pub fn spawn(
        program: &str,
        args: &[String],
        label_order: LabelOrder,
        budget: Option<PremiseBudget>,
    ) -> Result<Self, NliError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| NliError::backend(format!("cannot start '{program}': {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(SubprocessBackend {
            description: format!("local({program} {})", args.join(" ")),
            io: Mutex::new(ChildIo {
                child,
                stdin,
                stdout,
            }),
            label_order,
            budget,
        })
    }
}

impl EntailmentBackend for SubprocessBackend {
    fn entail_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<EntailmentTriple>, NliError> {
        validate_pairs(pairs, self.budget)?;
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        let request = serde_json::to_string(&PairsRequest {
            pairs: pairs.iter().map(|&(p, h)| [p, h]).collect(),
        })
        .map_err(|e| NliError::backend(e.to_string()))?;
        let mut io = self
            .io
            .lock()
            .map_err(|_| NliError::backend("worker lock poisoned"))?;
        writeln!(io.stdin, "{request}")
            .and_then(|_| io.stdin.flush())
            .map_err(|e| NliError::backend(format!("write to model process: {e}")))?;
        let mut line = String::new();
        let n = io
            .stdout
            .read_line(&mut line)
            .map_err(|e| NliError::backend(format!("read from model process: {e}")))?;
        if n == 0 {
            return Err(NliError::backend("model process exited"));
        }
        let parsed: TriplesResponse = serde_json::from_str(&line)
            .map_err(|e| NliError::backend(format!("bad model process output: {e}")))?;
        decode(parsed, pairs.len(), self.label_order)
    }

    fn budget(&self) -> Option<PremiseBudget> {
        self.budget
    }

    fn describe(&self) -> String {
        format!("{}, labels={}", self.description, self.label_order)
    }
}

impl Drop for SubprocessBackend {
    fn drop(&mut self) {
        if let Ok(io) = self.io.get_mut() {
            let _ = io.child.kill();
            let _ = io.child.wait();
        }
    }
}
