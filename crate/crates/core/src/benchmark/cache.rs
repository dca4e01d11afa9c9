use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::BenchmarkError;

/// Hex SHA-256 of a scorer configuration string.
pub fn config_hash(config: &str) -> String {
    hex::encode(Sha256::digest(config.as_bytes()))
}

#[derive(Serialize, Deserialize)]
struct Entry {
    record_id: String,
    score: f64,
}

/// Append-only record-score store for one scorer configuration:
/// `<dir>/scores-<config hash>.jsonl`.
#[derive(Debug)]
pub struct ScoreCache {
    path: PathBuf,
    entries: Mutex<HashMap<String, f64>>,
}

impl ScoreCache {
    pub fn open(dir: &Path, config: &str) -> Result<Self, BenchmarkError> {
        let path = dir.join(format!("scores-{}.jsonl", config_hash(config)));
        let err = |message: String| BenchmarkError::Cache {
            path: path.display().to_string(),
            message,
        };
        fs::create_dir_all(dir).map_err(|e| err(e.to_string()))?;
        let mut entries = HashMap::new();
        if path.exists() {
            let file = File::open(&path).map_err(|e| err(e.to_string()))?;
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| err(e.to_string()))?;
                if line.trim().is_empty() {
                    continue;
                }
                // a torn final line from an interrupted run is skipped
                match serde_json::from_str::<Entry>(&line) {
                    Ok(e) => {
                        entries.insert(e.record_id, e.score);
                    }
                    Err(e) => {
                        tracing::warn!(line = n + 1, error = %e, "skipping unreadable score cache line")
                    }
                }
            }
        }
        Ok(ScoreCache {
            path,
            entries: Mutex::new(entries),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, record_id: &str) -> Option<f64> {
        self.entries.lock().unwrap().get(record_id).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn insert_all(&self, scores: &[(&str, f64)]) -> Result<(), BenchmarkError> {
        if scores.is_empty() {
            return Ok(());
        }
        let mut entries = self.entries.lock().unwrap();
        let err = |e: std::io::Error| BenchmarkError::Cache {
            path: self.path.display().to_string(),
            message: e.to_string(),
        };
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(err)?;
        let mut buf = String::new();
        // keep a torn final line from swallowing the first new entry
        let len = file.metadata().map_err(err)?.len();
        if len > 0 {
            let mut last = [0u8; 1];
            let mut f = File::open(&self.path).map_err(err)?;
            f.seek(SeekFrom::Start(len - 1)).map_err(err)?;
            f.read_exact(&mut last).map_err(err)?;
            if last[0] != b'\n' {
                buf.push('\n');
            }
        }
        for (id, score) in scores {
            let line = serde_json::to_string(&Entry {
                record_id: id.to_string(),
                score: *score,
            })
            .expect("entry serializes");
            buf.push_str(&line);
            buf.push('\n');
            entries.insert(id.to_string(), *score);
        }
        file.write_all(buf.as_bytes()).map_err(err)?;
        Ok(())
    }
}
