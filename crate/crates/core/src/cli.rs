//! Command-line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use indexmap::IndexMap;
use rayon::prelude::*;
use serde_json::json;
use tracing::info;

use crate::benchmark::{run_benchmark, write_scores_csv, Protocol, ScoreCache};
use crate::claim_eval::easiness_report;
use crate::claims::ClaimError;
use crate::config::{ClaimSelection, CorefKind, NliSelection, Overrides, RunConfig};
use crate::error::{exit_code, Error, Result};
use crate::io;
use crate::pipeline::Pipeline;
use crate::scoring::ScoringMode;
use crate::store::{digest, LineStore};

#[derive(Debug, Parser)]
#[command(
    name = "claimfact",
    version,
    about = "Claim-level factuality scoring for summaries"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Window length in sentences.
    #[arg(long, global = true)]
    pub j: Option<usize>,
    /// Gating threshold on the coreference-stage score.
    #[arg(long = "T", global = true, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    /// mock | local-model:<checkpoint> | remote:<url>
    #[arg(long, global = true)]
    pub nli_backend: Option<NliSelection>,
    /// sentences | file-cache:<path> | remote-llm:<url> | local-seq2seq:<command>
    #[arg(long, global = true)]
    pub claim_backend: Option<ClaimSelection>,
    /// none | rule | precomputed
    #[arg(long, global = true)]
    pub coref_backend: Option<CorefKind>,
    /// per_split | single_threshold
    #[arg(long, global = true)]
    pub protocol: Option<Protocol>,
    /// fenice | nli_sent | nli_claim | nli_coref
    #[arg(long, global = true)]
    pub mode: Option<ScoringMode>,
    /// Below the threshold, keep the larger of the coreference and
    /// multi-granularity scores.
    #[arg(long, global = true)]
    pub monotone_gate: bool,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub bootstrap_seed: Option<u64>,
    /// error | warn | info | debug | trace
    #[arg(long, global = true)]
    pub log_level: Option<String>,
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            j: self.j,
            threshold: self.threshold,
            monotone_gate: self.monotone_gate.then_some(true),
            mode: self.mode,
            nli: self.nli_backend.clone(),
            claims: self.claim_backend.clone(),
            coref: self.coref_backend,
            protocol: self.protocol,
            workers: self.workers,
            cache_dir: self.cache_dir.clone(),
            bootstrap_seed: self.bootstrap_seed,
            log_level: self.log_level.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score summaries against their source documents (one report per line).
    Score {
        #[arg(long)]
        docs: PathBuf,
        #[arg(long)]
        summaries: PathBuf,
        /// Output JSONL; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Extract claims into a JSON object mapping summary id to claims.
    ExtractClaims {
        #[arg(long)]
        summaries: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Easiness precision/recall/F1 of system claims against reference claims.
    EvalClaims {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        human: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Tune thresholds and report balanced accuracy on a labeled benchmark.
    Benchmark {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// CSV export of per-record scores.
        #[arg(long)]
        scores_csv: Option<PathBuf>,
    },
}

/// Parse `args`, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    exit_code::SUCCESS
                }
                _ => exit_code::INPUT,
            };
        }
    };
    match execute(&cli) {
        Ok(()) => exit_code::SUCCESS,
        Err(e) => {
            report_error(&e);
            e.exit_code()
        }
    }
}

fn report_error(e: &Error) {
    let line = json!({
        "level": "ERROR",
        "kind": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    });
    eprintln!("{line}");
}

fn init_logging(level: &str) {
    let filter = tracing_subscriber::EnvFilter::try_new(level)
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info"));
    let _ = tracing_subscriber::fmt()
        .json()
        .with_current_span(true)
        .with_span_list(false)
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .try_init();
}

pub fn execute(cli: &Cli) -> Result<()> {
    let config = RunConfig::resolve(cli.global.config.as_deref(), &cli.global.overrides())?;
    init_logging(&config.run.log_level);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.run.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Score {
            docs,
            summaries,
            output,
        } => cmd_score(&config, docs, summaries, output.as_deref()),
        Command::ExtractClaims { summaries, output } => {
            cmd_extract_claims(&config, summaries, output.as_deref())
        }
        Command::EvalClaims {
            system,
            human,
            output,
        } => cmd_eval_claims(system, human, output.as_deref()),
        Command::Benchmark {
            records,
            output,
            scores_csv,
        } => cmd_benchmark(
            &config,
            records,
            output.as_deref(),
            scores_csv
                .as_deref()
                .or(config.benchmark.scores_csv.as_deref()),
        ),
    })
}

pub fn cmd_score(
    config: &RunConfig,
    docs: &Path,
    summaries: &Path,
    output: Option<&Path>,
) -> Result<()> {
    let seg = config.segmenter();
    let documents = io::read_documents(docs, &seg)?;
    let summaries = io::read_summaries(summaries, &seg)?;
    let pipeline = Pipeline::from_config(config)?;
    let config_key = pipeline.describe();
    let store = match &config.run.cache_dir {
        Some(dir) => Some(LineStore::open(
            dir,
            &format!("reports-{}", digest(&[&config_key])),
        )?),
        None => None,
    };

    // cache key per pair: configuration plus the exact document and summary
    let doc_json: std::collections::HashMap<&str, String> = documents
        .iter()
        .map(|d| {
            (
                d.id.as_str(),
                serde_json::to_string(d).expect("document serializes"),
            )
        })
        .collect();
    let keys: Vec<Option<String>> = summaries
        .iter()
        .map(|s| {
            doc_json.get(s.document_id.as_str()).map(|d| {
                digest(&[
                    &config_key,
                    d,
                    &serde_json::to_string(s).expect("summary serializes"),
                ])
            })
        })
        .collect();
    let cached: Vec<Option<String>> = keys
        .iter()
        .map(|k| {
            k.as_ref()
                .and_then(|k| store.as_ref().and_then(|s| s.get(k)))
        })
        .collect();

    let pending: Vec<crate::document::Summary> = summaries
        .iter()
        .zip(&cached)
        .filter(|(_, c)| c.is_none())
        .map(|(s, _)| s.clone())
        .collect();
    info!(
        summaries = summaries.len(),
        cached = summaries.len() - pending.len(),
        "scoring"
    );
    let mut fresh = pipeline.score_all(documents, &pending).into_iter();

    let mut lines = Vec::with_capacity(summaries.len());
    let mut new_entries = Vec::new();
    let mut errors = Vec::new();
    for (i, c) in cached.into_iter().enumerate() {
        match c {
            Some(line) => lines.push(line),
            None => match fresh.next().expect("one result per pending summary") {
                Ok(report) => {
                    let line = report.to_json_line();
                    if let Some(k) = &keys[i] {
                        new_entries.push((k.clone(), line.clone()));
                    }
                    lines.push(line);
                }
                Err(e) => errors.push(e),
            },
        }
    }
    if let Some(store) = &store {
        store.insert_all(&new_entries)?;
    }
    if let Some(first) = errors.into_iter().next() {
        return Err(first);
    }
    let mut out = String::new();
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    io::write_output(output, out.as_bytes())
}

pub fn cmd_extract_claims(
    config: &RunConfig,
    summaries: &Path,
    output: Option<&Path>,
) -> Result<()> {
    let summaries = io::read_summaries(summaries, &config.segmenter())?;
    let extractor = config.extractor()?;
    let results: Vec<Result<Vec<String>>> = summaries
        .par_iter()
        .map(|s| match extractor.extract(s) {
            Ok(claims) => Ok(claims.into_iter().map(|c| c.text).collect()),
            Err(ClaimError::EmptyClaims { summary_id }) => {
                tracing::warn!(summary_id = %summary_id, "extractor returned no claims");
                Ok(Vec::new())
            }
            Err(e) => Err(e.into()),
        })
        .collect();
    let mut out: IndexMap<String, Vec<String>> = IndexMap::new();
    for (s, r) in summaries.iter().zip(results) {
        out.insert(s.id.clone(), r?);
    }
    let mut text = serde_json::to_string_pretty(&out).expect("claims serialize");
    text.push('\n');
    io::write_output(output, text.as_bytes())
}

pub fn cmd_eval_claims(system: &Path, human: &Path, output: Option<&Path>) -> Result<()> {
    let system = io::read_claim_sets(system)?;
    let human = io::read_claim_sets(human)?;
    let report = easiness_report(&system, &human)?;
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    io::write_output(output, text.as_bytes())
}

pub fn cmd_benchmark(
    config: &RunConfig,
    records: &Path,
    output: Option<&Path>,
    scores_csv: Option<&Path>,
) -> Result<()> {
    let records = io::read_benchmark(records, &config.segmenter())?;
    let pipeline = Pipeline::from_config(config)?;
    let cache = match &config.run.cache_dir {
        Some(dir) => Some(ScoreCache::open(dir, &pipeline.describe())?),
        None => None,
    };
    let report = run_benchmark(
        &records,
        &pipeline,
        &config.benchmark_options(),
        cache.as_ref(),
    )?;
    if let Some(csv_path) = scores_csv {
        let mut buf = Vec::new();
        write_scores_csv(&report.records, &mut buf)
            .map_err(|e| Error::io(csv_path.display().to_string(), std::io::Error::other(e)))?;
        io::write_output(Some(csv_path), &buf)?;
    }
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    io::write_output(output, text.as_bytes())
}
