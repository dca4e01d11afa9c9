use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::BenchmarkError;

/// Binary factuality label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Factual,
    NotFactual,
}

impl Label {
    pub fn is_factual(self) -> bool {
        self == Label::Factual
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Factual => Label::NotFactual,
            Label::NotFactual => Label::Factual,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Factual => "factual",
            Label::NotFactual => "not_factual",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<bool> for Label {
    fn from(factual: bool) -> Self {
        if factual {
            Label::Factual
        } else {
            Label::NotFactual
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Accepts `1`/`0`, `true`/`false`, or `"factual"`/`"not_factual"` (also
/// `"consistent"`/`"inconsistent"`, `"1"`/`"0"`).
impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Bool(bool),
            Int(i64),
            Str(String),
        }
        let bad = |what: String| serde::de::Error::custom(format!("invalid gold_label {what}"));
        match Raw::deserialize(d)? {
            Raw::Bool(b) => Ok(Label::from(b)),
            Raw::Int(1) => Ok(Label::Factual),
            Raw::Int(0) => Ok(Label::NotFactual),
            Raw::Int(n) => Err(bad(n.to_string())),
            Raw::Str(s) => match s.to_ascii_lowercase().as_str() {
                "factual" | "consistent" | "1" | "true" => Ok(Label::Factual),
                "not_factual" | "non_factual" | "inconsistent" | "0" | "false" => {
                    Ok(Label::NotFactual)
                }
                _ => Err(bad(format!("'{s}'"))),
            },
        }
    }
}

/// Counts with `factual` as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn from_labels(predictions: &[Label], golds: &[Label]) -> Result<Self, BenchmarkError> {
        if predictions.len() != golds.len() {
            return Err(BenchmarkError::LengthMismatch {
                predictions: predictions.len(),
                golds: golds.len(),
            });
        }
        let mut c = Confusion::default();
        for (p, g) in predictions.iter().zip(golds) {
            match (p, g) {
                (Label::Factual, Label::Factual) => c.tp += 1,
                (Label::Factual, Label::NotFactual) => c.fp += 1,
                (Label::NotFactual, Label::NotFactual) => c.tn += 1,
                (Label::NotFactual, Label::Factual) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// `(TPR + TNR) / 2`; both classes must be present among the golds.
    pub fn balanced_accuracy(&self) -> Result<f64, BenchmarkError> {
        let positives = self.tp + self.fn_;
        let negatives = self.tn + self.fp;
        if positives == 0 || negatives == 0 {
            return Err(BenchmarkError::DegenerateLabels {
                positives,
                negatives,
                context: None,
            });
        }
        let tpr = self.tp as f64 / positives as f64;
        let tnr = self.tn as f64 / negatives as f64;
        Ok((tpr + tnr) / 2.0)
    }
}

pub fn balanced_accuracy(predictions: &[Label], golds: &[Label]) -> Result<f64, BenchmarkError> {
    Confusion::from_labels(predictions, golds)?.balanced_accuracy()
}

/// `score >= threshold` is factual.
pub fn binarize(scores: &[f64], threshold: f64) -> Vec<Label> {
    scores
        .iter()
        .map(|&s| Label::from(s >= threshold))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub threshold: f64,
    pub balanced_accuracy: f64,
    pub confusion: Confusion,
}

/// Distance of the sentinel thresholds from the extreme scores.
const SENTINEL_MARGIN: f64 = 1.0;

/// Threshold maximizing balanced accuracy on `(scores, golds)`.
///
/// Candidates are the midpoints between consecutive distinct scores plus one
/// sentinel below the minimum and one above the maximum; ties go to the
/// lowest threshold.
pub fn tune_threshold(scores: &[f64], golds: &[Label]) -> Result<ThresholdResult, BenchmarkError> {
    if scores.len() != golds.len() {
        return Err(BenchmarkError::LengthMismatch {
            predictions: scores.len(),
            golds: golds.len(),
        });
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(BenchmarkError::InvalidScore {
            index: i,
            value: scores[i],
        });
    }
    // degenerate check up front, also covers empty input
    Confusion::from_labels(&vec![Label::Factual; golds.len()], golds)?.balanced_accuracy()?;

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sweep upwards: at a candidate threshold, records with lower scores are
    // predicted not factual.
    let positives = golds.iter().filter(|g| g.is_factual()).count();
    let negatives = golds.len() - positives;
    let mut c = Confusion {
        tp: positives,
        fp: negatives,
        tn: 0,
        fn_: 0,
    };
    let min = scores[order[0]];
    let max = scores[order[order.len() - 1]];
    let mut best = ThresholdResult {
        threshold: min - SENTINEL_MARGIN,
        balanced_accuracy: c.balanced_accuracy()?,
        confusion: c,
    };
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if golds[order[i]].is_factual() {
                c.tp -= 1;
                c.fn_ += 1;
            } else {
                c.fp -= 1;
                c.tn += 1;
            }
            i += 1;
        }
        let threshold = if i < order.len() {
            (s + scores[order[i]]) / 2.0
        } else {
            max + SENTINEL_MARGIN
        };
        let ba = c.balanced_accuracy()?;
        if ba > best.balanced_accuracy {
            best = ThresholdResult {
                threshold,
                balanced_accuracy: ba,
                confusion: c,
            };
        }
    }
    Ok(best)
}
