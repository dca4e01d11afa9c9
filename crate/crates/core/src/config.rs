//! Run configuration: one TOML file plus command-line overrides.
//!
//! Precedence is flag > config file > built-in default. Every key is
//! optional; see `config/claimfact.toml` in the repository for the full
//! list with defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::benchmark::{BenchmarkOptions, Protocol, DEFAULT_BOOTSTRAP_RESAMPLES};
use crate::claims::{build_extractor, ClaimExtractor, ExtractorBackend, ExtractorConfig};
use crate::coref::{CorefResolver, NoCoref, RuleCoref};
use crate::error::{Error, Result};
use crate::nli::{
    Batched, EntailmentBackend, LabelOrder, Memoized, MockBackend, PremiseBudget, RemoteBackend,
    SubprocessBackend,
};
use crate::scoring::{ScoringMode, ScoringParams};
use crate::segment::RuleSegmenter;

/// Which entailment backend to build.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NliKind {
    /// Token-overlap stand-in; deterministic, no model.
    #[default]
    Mock,
    /// Local sidecar process serving a checkpoint over JSON lines.
    LocalModel,
    /// HTTP endpoint.
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NliConfig {
    pub backend: NliKind,
    /// URL for `remote`.
    pub url: String,
    /// Checkpoint name or path for `local-model`.
    pub model: String,
    /// Sidecar command for `local-model`; the checkpoint is passed as
    /// `--model <model>`.
    pub command: String,
    /// Output label order of the model, comma separated.
    pub labels: String,
    /// Character budget for premise + hypothesis; 0 disables the check.
    pub max_units: usize,
    pub batch_size: usize,
    pub timeout_secs: f64,
}

impl Default for NliConfig {
    fn default() -> Self {
        NliConfig {
            backend: NliKind::Mock,
            url: String::new(),
            model: String::new(),
            command: "python3 scripts/nli_server.py".to_string(),
            labels: "entailment,neutral,contradiction".to_string(),
            max_units: 0,
            batch_size: 32,
            timeout_secs: 60.0,
        }
    }
}

/// Parses the `--nli-backend` flag: `mock`, `remote:<url>` or
/// `local-model:<checkpoint>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NliSelection {
    pub kind: NliKind,
    pub target: Option<String>,
}

impl FromStr for NliSelection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (name, target) = match s.split_once(':') {
            Some((n, t)) => (n, Some(t.to_string())),
            None => (s, None),
        };
        let kind = match name {
            "mock" => NliKind::Mock,
            "local-model" | "local" => NliKind::LocalModel,
            "remote" => NliKind::Remote,
            other => {
                return Err(format!(
                    "unknown NLI backend '{other}' (expected mock, local-model:<checkpoint> or remote:<url>)"
                ))
            }
        };
        Ok(NliSelection { kind, target })
    }
}

/// Parses the `--claim-backend` flag: `<backend>[:<endpoint>]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimSelection {
    pub backend: ExtractorBackend,
    pub endpoint: Option<String>,
}

impl FromStr for ClaimSelection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let (name, endpoint) = match s.split_once(':') {
            Some((n, e)) => (n, Some(e.to_string())),
            None => (s, None),
        };
        Ok(ClaimSelection {
            backend: name.parse()?,
            endpoint,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorefKind {
    /// Ignore any clusters in the input.
    None,
    /// Use input clusters where given, otherwise run the rule-based resolver.
    #[default]
    Rule,
    /// Use input clusters only; documents without them get none.
    Precomputed,
}

impl FromStr for CorefKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(CorefKind::None),
            "rule" => Ok(CorefKind::Rule),
            "precomputed" => Ok(CorefKind::Precomputed),
            other => Err(format!(
                "unknown coref backend '{other}' (expected none, rule or precomputed)"
            )),
        }
    }
}

impl fmt::Display for CorefKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorefKind::None => "none",
            CorefKind::Rule => "rule",
            CorefKind::Precomputed => "precomputed",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorefConfig {
    pub backend: CorefKind,
    /// Resolve only sentences ending within this many characters.
    pub max_chars: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmenterConfig {
    /// Extra abbreviations (without the trailing period) that never end a
    /// sentence.
    pub abbreviations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    pub j: usize,
    #[serde(rename = "T")]
    pub threshold: f64,
    pub max_coref_variants: usize,
    pub monotone_gate: bool,
    pub mode: ScoringMode,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        let p = ScoringParams::default();
        ScoringConfig {
            j: p.j,
            threshold: p.threshold,
            max_coref_variants: p.max_coref_variants,
            monotone_gate: p.monotone_gate,
            mode: ScoringMode::Fenice,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkConfig {
    pub protocol: Protocol,
    /// Datasets pooled for single-threshold tuning; empty means all.
    pub designated: Vec<String>,
    pub bootstrap_resamples: usize,
    pub bootstrap_seed: u64,
    /// Optional CSV export of per-record scores.
    pub scores_csv: Option<PathBuf>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            protocol: Protocol::PerSplit,
            designated: Vec::new(),
            bootstrap_resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
            bootstrap_seed: 0,
            scores_csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    pub cache_dir: Option<PathBuf>,
    pub log_level: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            workers: 0,
            cache_dir: None,
            log_level: "info".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scoring: ScoringConfig,
    pub nli: NliConfig,
    pub claims: ExtractorConfig,
    pub coref: CorefConfig,
    pub segmenter: SegmenterConfig,
    pub benchmark: BenchmarkConfig,
    pub run: RunSection,
}

/// Command-line values; `None` leaves the file or default value in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub j: Option<usize>,
    pub threshold: Option<f64>,
    pub monotone_gate: Option<bool>,
    pub mode: Option<ScoringMode>,
    pub nli: Option<NliSelection>,
    pub claims: Option<ClaimSelection>,
    pub coref: Option<CorefKind>,
    pub protocol: Option<Protocol>,
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    pub bootstrap_seed: Option<u64>,
    pub log_level: Option<String>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml(&text).map_err(|e| e.context(path.display().to_string()))
    }

    /// Config from `path` if given, else defaults, with `overrides` applied.
    pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut config = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        config.apply(overrides);
        config.validate()?;
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(j) = o.j {
            self.scoring.j = j;
        }
        if let Some(t) = o.threshold {
            self.scoring.threshold = t;
        }
        if let Some(m) = o.monotone_gate {
            self.scoring.monotone_gate = m;
        }
        if let Some(m) = o.mode {
            self.scoring.mode = m;
        }
        if let Some(sel) = &o.nli {
            self.nli.backend = sel.kind.clone();
            if let Some(t) = &sel.target {
                match sel.kind {
                    NliKind::Remote => self.nli.url = t.clone(),
                    NliKind::LocalModel => self.nli.model = t.clone(),
                    NliKind::Mock => {}
                }
            }
        }
        if let Some(sel) = &o.claims {
            self.claims.backend = sel.backend;
            if let Some(e) = &sel.endpoint {
                self.claims.endpoint = e.clone();
            }
        }
        if let Some(c) = o.coref {
            self.coref.backend = c;
        }
        if let Some(p) = o.protocol {
            self.benchmark.protocol = p;
        }
        if let Some(w) = o.workers {
            self.run.workers = w;
        }
        if let Some(d) = &o.cache_dir {
            self.run.cache_dir = Some(d.clone());
        }
        if let Some(s) = o.bootstrap_seed {
            self.benchmark.bootstrap_seed = s;
        }
        if let Some(l) = &o.log_level {
            self.run.log_level = l.clone();
        }
    }

    pub fn params(&self) -> ScoringParams {
        ScoringParams {
            j: self.scoring.j,
            threshold: self.scoring.threshold,
            max_coref_variants: self.scoring.max_coref_variants,
            monotone_gate: self.scoring.monotone_gate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.claims
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        match self.nli.backend {
            NliKind::Remote if self.nli.url.is_empty() => {
                return Err(Error::Config("remote NLI backend needs nli.url".into()))
            }
            NliKind::LocalModel if self.nli.model.is_empty() => {
                return Err(Error::Config(
                    "local-model NLI backend needs nli.model".into(),
                ))
            }
            _ => {}
        }
        self.label_order()?;
        self.budget()?;
        if self.nli.batch_size == 0 {
            return Err(Error::Config("nli.batch_size must be positive".into()));
        }
        if !(self.nli.timeout_secs > 0.0 && self.nli.timeout_secs.is_finite()) {
            return Err(Error::Config("nli.timeout_secs must be positive".into()));
        }
        Ok(())
    }

    fn label_order(&self) -> Result<LabelOrder> {
        self.nli
            .labels
            .parse()
            .map_err(|e: String| Error::Config(format!("nli.labels: {e}")))
    }

    fn budget(&self) -> Result<Option<PremiseBudget>> {
        match self.nli.max_units {
            0 => Ok(None),
            n => PremiseBudget::new(n)
                .map(Some)
                .map_err(|e| Error::Config(format!("nli.max_units: {e}"))),
        }
    }

    pub fn segmenter(&self) -> RuleSegmenter {
        RuleSegmenter::with_abbreviations(self.segmenter.abbreviations.iter().map(String::as_str))
    }

    /// The configured backend, batched and memoized.
    pub fn nli_backend(&self) -> Result<Arc<dyn EntailmentBackend>> {
        let budget = self.budget()?;
        let base: Box<dyn EntailmentBackend> = match self.nli.backend {
            NliKind::Mock => {
                let m = MockBackend::new(self.nli.batch_size);
                Box::new(match budget {
                    Some(b) => m.with_budget(b),
                    None => m,
                })
            }
            NliKind::Remote => Box::new(RemoteBackend::new(
                &self.nli.url,
                self.label_order()?,
                budget,
                Duration::from_secs_f64(self.nli.timeout_secs),
            )?),
            NliKind::LocalModel => {
                let mut parts = self.nli.command.split_whitespace().map(str::to_string);
                let program = parts
                    .next()
                    .ok_or_else(|| Error::Config("nli.command is empty".into()))?;
                let mut args: Vec<String> = parts.collect();
                args.push("--model".into());
                args.push(self.nli.model.clone());
                Box::new(SubprocessBackend::spawn(
                    &program,
                    &args,
                    self.label_order()?,
                    budget,
                )?)
            }
        };
        Ok(Arc::new(Memoized::new(Batched::new(
            base,
            self.nli.batch_size,
        ))))
    }

    pub fn coref_resolver(&self) -> Box<dyn CorefResolver> {
        match self.coref.backend {
            CorefKind::Rule => Box::new(RuleCoref),
            CorefKind::None | CorefKind::Precomputed => Box::new(NoCoref),
        }
    }

    pub fn extractor(&self) -> Result<Box<dyn ClaimExtractor>> {
        Ok(build_extractor(&self.claims)?)
    }

    pub fn benchmark_options(&self) -> BenchmarkOptions {
        BenchmarkOptions {
            protocol: self.benchmark.protocol,
            designated: self.benchmark.designated.clone(),
            bootstrap_resamples: self.benchmark.bootstrap_resamples,
            bootstrap_seed: self.benchmark.bootstrap_seed,
        }
    }
}
