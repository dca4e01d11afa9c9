//! Append-only JSONL key/value file used for on-disk result caches.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Hex SHA-256 of `parts`, each length-prefixed so boundaries matter.
pub fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Serialize, Deserialize)]
struct Line {
    key: String,
    value: String,
}

#[derive(Debug)]
pub struct LineStore {
    path: PathBuf,
    entries: Mutex<HashMap<String, String>>,
}

impl LineStore {
    /// Open (or create) `<dir>/<name>.jsonl`. Unreadable lines, such as a
    /// torn last line, are skipped.
    pub fn open(dir: &Path, name: &str) -> Result<Self> {
        let path = dir.join(format!("{name}.jsonl"));
        let display = path.display().to_string();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        let mut entries = HashMap::new();
        if path.exists() {
            let file = File::open(&path).map_err(|e| Error::io(&display, e))?;
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|e| Error::io(&display, e))?;
                if let Ok(l) = serde_json::from_str::<Line>(&line) {
                    entries.insert(l.key, l.value);
                }
            }
        }
        Ok(LineStore {
            path,
            entries: Mutex::new(entries),
        })
    }

    pub fn get(&self, key: &str) -> Option<String> {
        self.entries.lock().unwrap().get(key).cloned()
    }

    pub fn insert_all(&self, items: &[(String, String)]) -> Result<()> {
        if items.is_empty() {
            return Ok(());
        }
        let display = self.path.display().to_string();
        let err = |e| Error::io(&display, e);
        let mut entries = self.entries.lock().unwrap();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(err)?;
        let mut buf = String::new();
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
        for (key, value) in items {
            let line = Line {
                key: key.clone(),
                value: value.clone(),
            };
            buf.push_str(&serde_json::to_string(&line).expect("line serializes"));
            buf.push('\n');
            entries.insert(key.clone(), value.clone());
        }
        file.write_all(buf.as_bytes()).map_err(err)
    }
}
