//! Entailment backends.
//!
//! Every backend maps `(premise, hypothesis)` pairs to probability triples
//! `(entailment, neutral, contradiction)`. Batching is an implementation
//! detail: element `i` of a batch result always equals the single-pair
//! result for pair `i`.

mod cache;
mod mock;
mod remote;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{Batched, Memoized};
pub use mock::MockBackend;
pub use remote::{RemoteBackend, SubprocessBackend};

/// Allowed deviation of a raw triple's sum from 1 before it is rejected.
pub const SUM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NliError {
    #[error("pair {index}: premise+hypothesis is {units} units, budget is {max_units}")]
    OversizedPremise {
        index: usize,
        units: usize,
        max_units: usize,
    },
    #[error("pair {index}: premise or hypothesis is empty")]
    EmptyInput { index: usize },
    #[error("pair {index}: invalid probability triple: {message}")]
    InvalidTriple { index: usize, message: String },
    #[error("entailment backend error{}: {message}", index.map(|i| format!(" at pair {i}")).unwrap_or_default())]
    Backend {
        index: Option<usize>,
        message: String,
    },
}

impl NliError {
    pub(crate) fn backend(message: impl Into<String>) -> Self {
        NliError::Backend {
            index: None,
            message: message.into(),
        }
    }

    /// Shift pair indices by `offset`, for errors raised inside a sub-batch.
    pub(crate) fn offset(self, offset: usize) -> Self {
        match self {
            NliError::OversizedPremise {
                index,
                units,
                max_units,
            } => NliError::OversizedPremise {
                index: index + offset,
                units,
                max_units,
            },
            NliError::EmptyInput { index } => NliError::EmptyInput {
                index: index + offset,
            },
            NliError::InvalidTriple { index, message } => NliError::InvalidTriple {
                index: index + offset,
                message,
            },
            NliError::Backend { index, message } => NliError::Backend {
                index: index.map(|i| i + offset),
                message,
            },
        }
    }
}

/// Probabilities of entailment, neutrality and contradiction; sums to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntailmentTriple {
    pub p_ent: f64,
    pub p_neu: f64,
    pub p_con: f64,
}

impl EntailmentTriple {
    /// Validate and renormalize. Each component must lie in `[0, 1]` and the
    /// sum must be within [`SUM_TOLERANCE`] of 1.
    pub fn new(p_ent: f64, p_neu: f64, p_con: f64) -> Result<Self, String> {
        for (name, p) in [
            ("entailment", p_ent),
            ("neutral", p_neu),
            ("contradiction", p_con),
        ] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} probability {p} outside [0, 1]"));
            }
        }
        let sum = p_ent + p_neu + p_con;
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(format!("probabilities sum to {sum}"));
        }
        // rounding-level drift is left alone so exact inputs stay exact
        if (sum - 1.0).abs() <= 1e-9 {
            return Ok(EntailmentTriple {
                p_ent,
                p_neu,
                p_con,
            });
        }
        Ok(EntailmentTriple {
            p_ent: p_ent / sum,
            p_neu: p_neu / sum,
            p_con: p_con / sum,
        })
    }

    /// Entailment minus contradiction probability, in `[-1, 1]`.
    pub fn score(&self) -> f64 {
        self.p_ent - self.p_con
    }
}

/// Capacity for premise + hypothesis, measured in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseBudget {
    max_units: usize,
}

impl PremiseBudget {
    pub const MIN_UNITS: usize = 16;

    pub fn new(max_units: usize) -> Result<Self, String> {
        if max_units < Self::MIN_UNITS {
            return Err(format!(
                "premise budget must be at least {} units, got {max_units}",
                Self::MIN_UNITS
            ));
        }
        Ok(PremiseBudget { max_units })
    }

    pub fn max_units(&self) -> usize {
        self.max_units
    }

    pub fn units(premise: &str, hypothesis: &str) -> usize {
        premise.chars().count() + hypothesis.chars().count()
    }

    pub fn fits(&self, premise: &str, hypothesis: &str) -> bool {
        Self::units(premise, hypothesis) <= self.max_units
    }
}

/// Reject empty inputs and pairs over `budget`, reporting the first bad index.
pub fn validate_pairs(
    pairs: &[(&str, &str)],
    budget: Option<PremiseBudget>,
) -> Result<(), NliError> {
    for (index, (premise, hypothesis)) in pairs.iter().enumerate() {
        if premise.trim().is_empty() || hypothesis.trim().is_empty() {
            return Err(NliError::EmptyInput { index });
        }
        if let Some(b) = budget {
            if !b.fits(premise, hypothesis) {
                return Err(NliError::OversizedPremise {
                    index,
                    units: PremiseBudget::units(premise, hypothesis),
                    max_units: b.max_units,
                });
            }
        }
    }
    Ok(())
}

pub trait EntailmentBackend: Send + Sync {
    fn entail_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<EntailmentTriple>, NliError>;

    fn entail(&self, premise: &str, hypothesis: &str) -> Result<EntailmentTriple, NliError> {
        let mut out = self.entail_batch(&[(premise, hypothesis)])?;
        out.pop()
            .ok_or_else(|| NliError::backend("backend returned no result"))
    }

    fn budget(&self) -> Option<PremiseBudget> {
        None
    }

    /// Stable description of the backend and its settings, used to key
    /// on-disk score caches.
    fn describe(&self) -> String;
}

impl<B: EntailmentBackend + ?Sized> EntailmentBackend for &B {
    fn entail_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<EntailmentTriple>, NliError> {
        (**self).entail_batch(pairs)
    }
    fn budget(&self) -> Option<PremiseBudget> {
        (**self).budget()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<B: EntailmentBackend + ?Sized> EntailmentBackend for Box<B> {
    fn entail_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<EntailmentTriple>, NliError> {
        (**self).entail_batch(pairs)
    }
    fn budget(&self) -> Option<PremiseBudget> {
        (**self).budget()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

impl<B: EntailmentBackend + ?Sized> EntailmentBackend for std::sync::Arc<B> {
    fn entail_batch(&self, pairs: &[(&str, &str)]) -> Result<Vec<EntailmentTriple>, NliError> {
        (**self).entail_batch(pairs)
    }
    fn budget(&self) -> Option<PremiseBudget> {
        (**self).budget()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NliLabel {
    Entailment,
    Neutral,
    Contradiction,
}

impl FromStr for NliLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "entailment" | "ent" | "entail" => Ok(NliLabel::Entailment),
            "neutral" | "neu" | "not_entailment" => Ok(NliLabel::Neutral),
            "contradiction" | "con" | "contradict" => Ok(NliLabel::Contradiction),
            other => Err(format!("unknown NLI label '{other}'")),
        }
    }
}

/// Position of each label in a model's output vector.
///
/// Checkpoints disagree on label order, so adapters always map through an
/// explicit order instead of assuming one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelOrder([NliLabel; 3]);

impl Default for LabelOrder {
    fn default() -> Self {
        LabelOrder([
            NliLabel::Entailment,
            NliLabel::Neutral,
            NliLabel::Contradiction,
        ])
    }
}

impl LabelOrder {
    pub fn new(labels: [NliLabel; 3]) -> Result<Self, String> {
        let has = |l| labels.contains(&l);
        if has(NliLabel::Entailment) && has(NliLabel::Neutral) && has(NliLabel::Contradiction) {
            Ok(LabelOrder(labels))
        } else {
            Err(format!("label order must name each label once: {labels:?}"))
        }
    }

    /// Build from label names as reported by a model config, e.g.
    /// `["contradiction", "entailment", "neutral"]`.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, String> {
        if names.len() != 3 {
            return Err(format!("expected 3 labels, got {}", names.len()));
        }
        let mut labels = [NliLabel::Entailment; 3];
        for (slot, name) in labels.iter_mut().zip(names) {
            *slot = name.as_ref().parse()?;
        }
        LabelOrder::new(labels)
    }

    pub fn to_triple(&self, raw: &[f64]) -> Result<EntailmentTriple, String> {
        if raw.len() != 3 {
            return Err(format!("expected 3 probabilities, got {}", raw.len()));
        }
        let mut ent = 0.0;
        let mut neu = 0.0;
        let mut con = 0.0;
        for (label, &p) in self.0.iter().zip(raw) {
            match label {
                NliLabel::Entailment => ent = p,
                NliLabel::Neutral => neu = p,
                NliLabel::Contradiction => con = p,
            }
        }
        EntailmentTriple::new(ent, neu, con)
    }
}

impl FromStr for LabelOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let names: Vec<&str> = s.split(',').collect();
        LabelOrder::from_names(&names)
    }
}

impl fmt::Display for LabelOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self
            .0
            .iter()
            .map(|l| match l {
                NliLabel::Entailment => "entailment",
                NliLabel::Neutral => "neutral",
                NliLabel::Contradiction => "contradiction",
            })
            .collect();
        write!(f, "{}", names.join(","))
    }
}
