//! Claim-extraction quality: ROUGE-1 F1 and easiness precision/recall/F1
//! between system and reference claim sets.
//!
//! ROUGE-1 here is lowercase, unstemmed, with clipped (multiset) unigram
//! overlap and no stopword removal.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::tokens;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClaimEvalError {
    #[error("{side} claim set is empty{}", summary_id.as_ref().map(|s| format!(" for summary '{s}'")).unwrap_or_default())]
    EmptyClaimSet {
        side: &'static str,
        summary_id: Option<String>,
    },
    #[error("no summaries in common between system and reference claim files")]
    NoOverlap,
}

fn counts(text: &str) -> HashMap<String, usize> {
    let mut m = HashMap::new();
    for t in tokens(text) {
        *m.entry(t).or_insert(0) += 1;
    }
    m
}

/// Unigram F1 between `a` and `b`; 0 when either side has no tokens.
pub fn rouge1_f1(a: &str, b: &str) -> f64 {
    let ca = counts(a);
    let cb = counts(b);
    let na: usize = ca.values().sum();
    let nb: usize = cb.values().sum();
    if na == 0 || nb == 0 {
        return 0.0;
    }
    let overlap: usize = ca
        .iter()
        .map(|(t, &n)| n.min(*cb.get(t).unwrap_or(&0)))
        .sum();
    if overlap == 0 {
        return 0.0;
    }
    let p = overlap as f64 / na as f64;
    let r = overlap as f64 / nb as f64;
    2.0 * p * r / (p + r)
}

fn check<S: AsRef<str>>(claims: &[S], side: &'static str) -> Result<(), ClaimEvalError> {
    if claims.is_empty() {
        return Err(ClaimEvalError::EmptyClaimSet {
            side,
            summary_id: None,
        });
    }
    Ok(())
}

fn mean_best<A: AsRef<str>, B: AsRef<str>>(from: &[A], to: &[B]) -> f64 {
    let total: f64 = from
        .iter()
        .map(|c| {
            to.iter()
                .map(|r| rouge1_f1(c.as_ref(), r.as_ref()))
                .fold(0.0, f64::max)
        })
        .sum();
    total / from.len() as f64
}

/// Mean over system claims of the best ROUGE-1 F1 against any reference claim.
pub fn easiness_precision<S: AsRef<str>, H: AsRef<str>>(
    system: &[S],
    human: &[H],
) -> Result<f64, ClaimEvalError> {
    check(system, "system")?;
    check(human, "reference")?;
    Ok(mean_best(system, human))
}

/// Mean over reference claims of the best ROUGE-1 F1 against any system claim.
pub fn easiness_recall<S: AsRef<str>, H: AsRef<str>>(
    system: &[S],
    human: &[H],
) -> Result<f64, ClaimEvalError> {
    check(system, "system")?;
    check(human, "reference")?;
    Ok(mean_best(human, system))
}

/// Harmonic mean of `p` and `r`; 0 when both are 0.
pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else if p == r {
        p
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Harmonic mean of easiness precision and recall for one claim-set pair.
pub fn easiness_f1<S: AsRef<str>, H: AsRef<str>>(
    system: &[S],
    human: &[H],
) -> Result<f64, ClaimEvalError> {
    Ok(harmonic_mean(
        easiness_precision(system, human)?,
        easiness_recall(system, human)?,
    ))
}

/// One line of a claims JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimSetRecord {
    pub summary_id: String,
    pub claims: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryEasiness {
    pub summary_id: String,
    pub easiness_p: f64,
    pub easiness_r: f64,
    pub easiness_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EasinessReport {
    /// Mean of per-summary precision.
    pub easiness_p: f64,
    /// Mean of per-summary recall.
    pub easiness_r: f64,
    /// Harmonic mean of `easiness_p` and `easiness_r`.
    pub easiness_f1: f64,
    /// Mean of per-summary F1, reported alongside the primary F1.
    pub easiness_f1_mean_of_pairs: f64,
    pub summaries: Vec<SummaryEasiness>,
    /// Summary ids present in only one of the two inputs; excluded from the
    /// averages.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unmatched: Vec<String>,
}

/// Corpus-level easiness over summaries present in both inputs, in the order
/// of `system`.
pub fn easiness_report(
    system: &[ClaimSetRecord],
    human: &[ClaimSetRecord],
) -> Result<EasinessReport, ClaimEvalError> {
    let reference: HashMap<&str, &ClaimSetRecord> =
        human.iter().map(|r| (r.summary_id.as_str(), r)).collect();
    let mut summaries = Vec::new();
    let mut unmatched = Vec::new();
    for s in system {
        let Some(h) = reference.get(s.summary_id.as_str()) else {
            unmatched.push(s.summary_id.clone());
            continue;
        };
        let with_id = |e: ClaimEvalError| match e {
            ClaimEvalError::EmptyClaimSet { side, .. } => ClaimEvalError::EmptyClaimSet {
                side,
                summary_id: Some(s.summary_id.clone()),
            },
            other => other,
        };
        let p = easiness_precision(&s.claims, &h.claims).map_err(with_id)?;
        let r = easiness_recall(&s.claims, &h.claims).map_err(with_id)?;
        summaries.push(SummaryEasiness {
            summary_id: s.summary_id.clone(),
            easiness_p: p,
            easiness_r: r,
            easiness_f1: harmonic_mean(p, r),
        });
    }
    let system_ids: std::collections::HashSet<&str> =
        system.iter().map(|s| s.summary_id.as_str()).collect();
    unmatched.extend(
        human
            .iter()
            .filter(|h| !system_ids.contains(h.summary_id.as_str()))
            .map(|h| h.summary_id.clone()),
    );
    if summaries.is_empty() {
        return Err(ClaimEvalError::NoOverlap);
    }
    let n = summaries.len() as f64;
    let p = summaries.iter().map(|s| s.easiness_p).sum::<f64>() / n;
    let r = summaries.iter().map(|s| s.easiness_r).sum::<f64>() / n;
    let f1_mean = summaries.iter().map(|s| s.easiness_f1).sum::<f64>() / n;
    Ok(EasinessReport {
        easiness_p: p,
        easiness_r: r,
        easiness_f1: harmonic_mean(p, r),
        easiness_f1_mean_of_pairs: f1_mean,
        summaries,
        unmatched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rouge_examples() {
        assert_eq!(rouge1_f1("the cat sat", "the cat sat"), 1.0);
        assert_eq!(rouge1_f1("a b", "c d"), 0.0);
        assert!((rouge1_f1("the cat sat", "the cat ran here") - 4.0 / 7.0).abs() < 1e-12);
        assert_eq!(rouge1_f1("", "x"), 0.0);
        assert_eq!(rouge1_f1("...", "x"), 0.0);
        // clipped counts: "the the" vs "the" overlaps once
        assert!((rouge1_f1("the the", "the") - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(rouge1_f1("The CAT", "the cat"), 1.0);
    }

    #[test]
    fn easiness_examples() {
        let s = ["the cat sat"];
        let h = ["the cat ran here", "dogs bark"];
        assert!((easiness_precision(&s, &h).unwrap() - 4.0 / 7.0).abs() < 1e-12);
        assert_eq!(easiness_precision(&h, &h).unwrap(), 1.0);
        assert_eq!(easiness_precision(&["zebra"], &h).unwrap(), 0.0);
        let h3 = ["a b", "c d", "zz yy"];
        let s2 = ["a b", "c d"];
        assert!((easiness_recall(&s2, &h3).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(easiness_recall(&h3, &s2).unwrap(), 1.0);
        assert!(matches!(
            easiness_precision::<&str, &str>(&[], &h),
            Err(ClaimEvalError::EmptyClaimSet { side: "system", .. })
        ));
        assert!(easiness_recall::<&str, &str>(&s, &[]).is_err());
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic_mean(0.4, 0.4), 0.4);
        assert_eq!(harmonic_mean(1.0, 0.0), 0.0);
        assert_eq!(harmonic_mean(0.0, 0.0), 0.0);
        assert!((harmonic_mean(0.8, 0.6) - 0.96 / 1.4).abs() < 1e-12);
    }

    #[test]
    fn report_averages_and_unmatched() {
        let rec = |id: &str, c: &[&str]| ClaimSetRecord {
            summary_id: id.into(),
            claims: c.iter().map(|s| s.to_string()).collect(),
        };
        let sys = vec![rec("a", &["x y"]), rec("b", &["p"]), rec("c", &["q"])];
        let hum = vec![rec("b", &["p", "r"]), rec("a", &["x y"]), rec("d", &["z"])];
        let r = easiness_report(&sys, &hum).unwrap();
        assert_eq!(r.summaries.len(), 2);
        assert_eq!(r.unmatched, vec!["c".to_string(), "d".to_string()]);
        // a: P=R=1; b: P=1, R=1/2
        assert_eq!(r.easiness_p, 1.0);
        assert_eq!(r.easiness_r, 0.75);
        assert!((r.easiness_f1 - harmonic_mean(1.0, 0.75)).abs() < 1e-12);
        assert!((r.easiness_f1_mean_of_pairs - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
        assert_eq!(
            easiness_report(&[rec("a", &["x"])], &[rec("b", &["x"])]),
            Err(ClaimEvalError::NoOverlap)
        );
        let err = easiness_report(&[rec("a", &[])], &[rec("a", &["x"])]).unwrap_err();
        assert!(err.to_string().contains("'a'"));
    }

    fn claim_set() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec("[abcde ]{1,12}", 1..5)
    }

    proptest! {
        #[test]
        fn precision_recall_symmetry(s in claim_set(), h in claim_set()) {
            prop_assert_eq!(easiness_precision(&s, &h).unwrap(), easiness_recall(&h, &s).unwrap());
        }

        #[test]
        fn bounded_and_monotone(s in claim_set(), h in claim_set(), extra in "[abcde ]{1,12}") {
            let p = easiness_precision(&s, &h).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
            let mut h2 = h.clone();
            h2.push(extra.clone());
            prop_assert!(easiness_precision(&s, &h2).unwrap() >= p);
            let r = easiness_recall(&s, &h).unwrap();
            let mut s2 = s.clone();
            s2.push(extra);
            prop_assert!(easiness_recall(&s2, &h).unwrap() >= r);
        }

        #[test]
        fn order_invariant(s in claim_set(), h in claim_set()) {
            let mut sr = s.clone();
            sr.reverse();
            let a = easiness_precision(&s, &h).unwrap();
            let b = easiness_precision(&sr, &h).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
