//! Labeled-benchmark evaluation: threshold tuning on validation splits and
//! balanced accuracy on test splits.

mod cache;
mod metrics;

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::document::{Document, Summary};
use crate::nli::NliError;

pub use cache::{config_hash, ScoreCache};
pub use metrics::{balanced_accuracy, binarize, tune_threshold, Confusion, Label, ThresholdResult};

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Debug, Error)]
pub enum BenchmarkError {
    #[error("gold labels need both classes, got {positives} factual and {negatives} not factual{}", context.as_ref().map(|c| format!(" ({c})")).unwrap_or_default())]
    DegenerateLabels {
        positives: usize,
        negatives: usize,
        context: Option<String>,
    },
    #[error("{predictions} predictions for {golds} gold labels")]
    LengthMismatch { predictions: usize, golds: usize },
    #[error("score {index} is not finite: {value}")]
    InvalidScore { index: usize, value: f64 },
    #[error("dataset '{dataset}' has no {split} split")]
    MissingSplit { dataset: String, split: Split },
    #[error("designated dataset '{0}' does not occur in the benchmark")]
    UnknownDataset(String),
    #[error("benchmark has no records")]
    EmptyBenchmark,
    #[error(transparent)]
    Nli(#[from] NliError),
    #[error("record '{record_id}': {source}")]
    Scorer {
        record_id: String,
        #[source]
        source: Box<crate::Error>,
    },
    #[error("score cache {path}: {message}")]
    Cache { path: String, message: String },
}

impl BenchmarkError {
    fn in_context(self, ctx: impl Into<String>) -> Self {
        match self {
            BenchmarkError::DegenerateLabels {
                positives,
                negatives,
                ..
            } => BenchmarkError::DegenerateLabels {
                positives,
                negatives,
                context: Some(ctx.into()),
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    #[serde(alias = "val", alias = "dev")]
    Validation,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub record_id: String,
    pub document: Document,
    pub summary: Summary,
    pub gold_label: Label,
    pub system: String,
    pub dataset: String,
    pub split: Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Tune a threshold on each dataset's validation split.
    #[default]
    PerSplit,
    /// Tune one threshold on the pooled validation splits of the designated
    /// datasets and apply it to every test split.
    SingleThreshold,
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "per_split" => Ok(Protocol::PerSplit),
            "single_threshold" => Ok(Protocol::SingleThreshold),
            other => Err(format!(
                "unknown protocol '{other}' (expected per_split or single_threshold)"
            )),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::PerSplit => "per_split",
            Protocol::SingleThreshold => "single_threshold",
        })
    }
}

/// Produces one factuality score per record.
pub trait RecordScorer: Sync {
    fn score(&self, record: &BenchmarkRecord) -> Result<f64, crate::Error>;

    /// Stable description of everything that affects scores; hashed to key
    /// the on-disk score cache.
    fn cache_key(&self) -> String;
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkOptions {
    pub protocol: Protocol,
    /// Datasets whose validation splits are pooled under
    /// `Protocol::SingleThreshold`; empty means all.
    pub designated: Vec<String>,
    pub bootstrap_resamples: usize,
    pub bootstrap_seed: u64,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        BenchmarkOptions {
            protocol: Protocol::PerSplit,
            designated: Vec::new(),
            bootstrap_resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
            bootstrap_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunedThreshold {
    /// Datasets whose validation records were used.
    pub datasets: Vec<String>,
    pub n_validation: usize,
    pub validation: ThresholdResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetResult {
    pub dataset: String,
    pub threshold: f64,
    pub n_test: usize,
    pub balanced_accuracy: f64,
    pub confusion: Confusion,
    /// Standard deviation of test balanced accuracy over bootstrap resamples;
    /// `None` when fewer than two resamples had both classes.
    pub bootstrap_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapInfo {
    pub method: String,
    pub resamples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub record_id: String,
    pub dataset: String,
    pub split: Split,
    pub system: String,
    pub gold_label: Label,
    pub score: f64,
    pub prediction: Label,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub protocol: Protocol,
    pub scorer: String,
    pub config_hash: String,
    pub thresholds: Vec<TunedThreshold>,
    pub datasets: Vec<DatasetResult>,
    /// Mean of the per-dataset test balanced accuracies.
    pub average_balanced_accuracy: f64,
    pub bootstrap: BootstrapInfo,
    pub records: Vec<ScoredRecord>,
}

/// Scores for `records` in input order, served from `cache` where present.
/// New scores are appended to the cache in input order, including those
/// computed before a failure.
pub fn score_records(
    records: &[BenchmarkRecord],
    scorer: &dyn RecordScorer,
    cache: Option<&ScoreCache>,
) -> Result<Vec<f64>, BenchmarkError> {
    let results: Vec<(Result<f64, crate::Error>, bool)> = records
        .par_iter()
        .map(|r| match cache.and_then(|c| c.get(&r.record_id)) {
            Some(s) => (Ok(s), true),
            None => (scorer.score(r), false),
        })
        .collect();
    if let Some(cache) = cache {
        let fresh: Vec<(&str, f64)> = records
            .iter()
            .zip(&results)
            .filter_map(|(r, (res, hit))| match res {
                Ok(s) if !hit => Some((r.record_id.as_str(), *s)),
                _ => None,
            })
            .collect();
        cache.insert_all(&fresh)?;
    }
    records
        .iter()
        .zip(results)
        .map(|(r, (res, _))| {
            res.map_err(|e| BenchmarkError::Scorer {
                record_id: r.record_id.clone(),
                source: Box::new(e),
            })
        })
        .collect()
}

fn bootstrap_std(
    predictions: &[Label],
    golds: &[Label],
    resamples: usize,
    seed: u64,
    stream: u64,
) -> Option<f64> {
    if golds.is_empty() || resamples == 0 {
        return None;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = golds.len();
    let mut values = Vec::with_capacity(resamples);
    let mut p = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for _ in 0..resamples {
        p.clear();
        g.clear();
        for _ in 0..n {
            let i = rng.gen_range(0..n);
            p.push(predictions[i]);
            g.push(golds[i]);
        }
        // resamples drawing a single class have no balanced accuracy
        if let Ok(ba) = balanced_accuracy(&p, &g) {
            values.push(ba);
        }
    }
    if values.len() < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    Some(var.sqrt())
}

/// Score, tune and evaluate per `options.protocol`.
pub fn run_benchmark(
    records: &[BenchmarkRecord],
    scorer: &dyn RecordScorer,
    options: &BenchmarkOptions,
    cache: Option<&ScoreCache>,
) -> Result<BenchmarkReport, BenchmarkError> {
    if records.is_empty() {
        return Err(BenchmarkError::EmptyBenchmark);
    }
    let key = scorer.cache_key();
    let scores = score_records(records, scorer, cache)?;
    evaluate_scores(records, &scores, &key, options)
}

/// Tuning and evaluation over precomputed scores (`scores[i]` belongs to
/// `records[i]`).
pub fn evaluate_scores(
    records: &[BenchmarkRecord],
    scores: &[f64],
    scorer: &str,
    options: &BenchmarkOptions,
) -> Result<BenchmarkReport, BenchmarkError> {
    if records.is_empty() {
        return Err(BenchmarkError::EmptyBenchmark);
    }
    if records.len() != scores.len() {
        return Err(BenchmarkError::LengthMismatch {
            predictions: scores.len(),
            golds: records.len(),
        });
    }
    let mut datasets: Vec<&str> = Vec::new();
    let mut split_index: HashMap<(&str, Split), Vec<usize>> = HashMap::new();
    fn split<'m>(
        index: &'m HashMap<(&'m str, Split), Vec<usize>>,
        dataset: &'m str,
        split: Split,
    ) -> Result<&'m [usize], BenchmarkError> {
        index
            .get(&(dataset, split))
            .map(Vec::as_slice)
            .ok_or_else(|| BenchmarkError::MissingSplit {
                dataset: dataset.to_string(),
                split,
            })
    }
    for (i, r) in records.iter().enumerate() {
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(&r.dataset);
        }
        split_index
            .entry((&r.dataset, r.split))
            .or_default()
            .push(i);
    }
    let tune = |names: &[&str]| -> Result<TunedThreshold, BenchmarkError> {
        let mut idx: Vec<usize> = Vec::new();
        for d in names {
            idx.extend(split(&split_index, d, Split::Validation)?);
        }
        let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
        let g: Vec<Label> = idx.iter().map(|&i| records[i].gold_label).collect();
        let validation = tune_threshold(&s, &g)
            .map_err(|e| e.in_context(format!("validation split of {}", names.join("+"))))?;
        Ok(TunedThreshold {
            datasets: names.iter().map(|d| d.to_string()).collect(),
            n_validation: idx.len(),
            validation,
        })
    };

    let mut thresholds = Vec::new();
    let mut per_dataset_threshold = HashMap::new();
    match options.protocol {
        Protocol::PerSplit => {
            for d in &datasets {
                split(&split_index, d, Split::Test)?;
                let t = tune(&[d])?;
                per_dataset_threshold.insert(*d, t.validation.threshold);
                thresholds.push(t);
            }
        }
        Protocol::SingleThreshold => {
            for d in &options.designated {
                if !datasets.contains(&d.as_str()) {
                    return Err(BenchmarkError::UnknownDataset(d.clone()));
                }
            }
            let pooled: Vec<&str> = if options.designated.is_empty() {
                datasets.clone()
            } else {
                datasets
                    .iter()
                    .copied()
                    .filter(|d| options.designated.iter().any(|x| x == d))
                    .collect()
            };
            let t = tune(&pooled)?;
            for d in &datasets {
                per_dataset_threshold.insert(*d, t.validation.threshold);
            }
            thresholds.push(t);
        }
    }

    let mut results = Vec::with_capacity(datasets.len());
    for (stream, d) in datasets.iter().enumerate() {
        let idx = split(&split_index, d, Split::Test)?;
        let threshold = per_dataset_threshold[d];
        let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
        let g: Vec<Label> = idx.iter().map(|&i| records[i].gold_label).collect();
        let p = binarize(&s, threshold);
        let confusion = Confusion::from_labels(&p, &g)?;
        let ba = confusion
            .balanced_accuracy()
            .map_err(|e| e.in_context(format!("test split of {d}")))?;
        results.push(DatasetResult {
            dataset: d.to_string(),
            threshold,
            n_test: idx.len(),
            balanced_accuracy: ba,
            confusion,
            bootstrap_std: bootstrap_std(
                &p,
                &g,
                options.bootstrap_resamples,
                options.bootstrap_seed,
                stream as u64,
            ),
        });
    }
    let average = results.iter().map(|r| r.balanced_accuracy).sum::<f64>() / results.len() as f64;

    let scored = records
        .iter()
        .zip(scores)
        .map(|(r, &score)| ScoredRecord {
            record_id: r.record_id.clone(),
            dataset: r.dataset.clone(),
            split: r.split,
            system: r.system.clone(),
            gold_label: r.gold_label,
            score,
            prediction: Label::from(score >= per_dataset_threshold[r.dataset.as_str()]),
        })
        .collect();

    Ok(BenchmarkReport {
        protocol: options.protocol,
        scorer: scorer.to_string(),
        config_hash: config_hash(scorer),
        thresholds,
        datasets: results,
        average_balanced_accuracy: average,
        bootstrap: BootstrapInfo {
            method: "standard deviation of test balanced accuracy over records resampled with replacement at the fixed tuned threshold".into(),
            resamples: options.bootstrap_resamples,
            seed: options.bootstrap_seed,
        },
        records: scored,
    })
}

/// Per-record scores as CSV, in report order.
pub fn write_scores_csv<W: Write>(records: &[ScoredRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "record_id",
        "dataset",
        "split",
        "system",
        "gold_label",
        "score",
        "prediction",
    ])?;
    for r in records {
        w.write_record([
            r.record_id.as_str(),
            r.dataset.as_str(),
            &r.split.to_string(),
            r.system.as_str(),
            r.gold_label.as_str(),
            &r.score.to_string(),
            r.prediction.as_str(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
