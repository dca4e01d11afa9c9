use tracing::debug;

use super::report::{
    AlignedSpan, ChunkedPremise, ClaimVerdict, Diagnostics, FactualityReport, Granularity, Stage,
    SubScores, Substitution,
};
use super::{ScoreError, ScoringMode, ScoringParams};
use crate::document::{Claim, Document, Summary};
use crate::nli::{EntailmentBackend, NliError, PremiseBudget};

/// Entailment minus contradiction probability for one premise/claim pair.
pub fn nli_score(
    premise: &str,
    claim_text: &str,
    backend: &dyn EntailmentBackend,
) -> Result<f64, NliError> {
    Ok(backend.entail(premise, claim_text)?.score())
}

/// Score every premise against `hypothesis` in one backend request.
fn score_premises(
    premises: &[&str],
    hypothesis: &str,
    stage: &'static str,
    backend: &dyn EntailmentBackend,
) -> Result<Vec<f64>, NliError> {
    debug!(stage, pairs = premises.len(), "nli request");
    let pairs: Vec<(&str, &str)> = premises.iter().map(|p| (*p, hypothesis)).collect();
    Ok(backend
        .entail_batch(&pairs)?
        .into_iter()
        .map(|t| t.score())
        .collect())
}

/// Highest score and the lowest index attaining it.
fn first_max(scores: &[f64]) -> (f64, usize) {
    let mut best = (scores[0], 0);
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > best.0 {
            best = (s, i);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SentenceAlignment {
    pub score: f64,
    pub index: usize,
}

/// Best single document sentence for `claim`.
pub fn score_sentences(
    doc: &Document,
    claim: &Claim,
    backend: &dyn EntailmentBackend,
) -> Result<SentenceAlignment, NliError> {
    let premises: Vec<&str> = doc.sentences.iter().map(|s| s.text.as_str()).collect();
    if premises.is_empty() {
        return Err(NliError::backend(format!(
            "document '{}' has no sentences",
            doc.id
        )));
    }
    let scores = score_premises(&premises, &claim.text, "sentence", backend)?;
    let (score, index) = first_max(&scores);
    Ok(SentenceAlignment { score, index })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorefVariant {
    pub text: String,
    pub substitution: Substitution,
}

/// Rewrites of sentence `sentence_index` replacing one cluster mention with
/// one other surface form of its cluster.
///
/// Mentions are visited by start offset, then cluster order, then position
/// within the cluster; alternatives follow cluster order with duplicates and
/// the mention's own surface skipped. At most `params.max_coref_variants`
/// variants are returned. The unmodified sentence is not included.
pub fn coref_variants(
    doc: &Document,
    sentence_index: usize,
    params: &ScoringParams,
) -> Vec<CorefVariant> {
    let Some(sentence) = doc.sentences.get(sentence_index) else {
        return Vec::new();
    };
    let mut mentions: Vec<(usize, usize, usize)> = Vec::new();
    for (ci, cluster) in doc.coref_clusters.iter().enumerate() {
        for (mi, m) in cluster.mentions.iter().enumerate() {
            if m.sentence_index == sentence_index {
                mentions.push((m.start, ci, mi));
            }
        }
    }
    mentions.sort_unstable();

    let chars: Vec<char> = sentence.text.chars().collect();
    let mut out = Vec::new();
    for (_, ci, mi) in mentions {
        let cluster = &doc.coref_clusters[ci];
        let m = &cluster.mentions[mi];
        let mut used: Vec<&str> = vec![m.surface.as_str()];
        for other in &cluster.mentions {
            if used.contains(&other.surface.as_str()) {
                continue;
            }
            used.push(other.surface.as_str());
            if out.len() == params.max_coref_variants {
                return out;
            }
            let mut text: String = chars[..m.start].iter().collect();
            text.push_str(&other.surface);
            text.extend(&chars[m.end..]);
            out.push(CorefVariant {
                text,
                substitution: Substitution {
                    mention_start: m.start,
                    mention_end: m.end,
                    original: m.surface.clone(),
                    replacement: other.surface.clone(),
                },
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorefAlignment {
    pub sentence: SentenceAlignment,
    pub score: f64,
    pub aligned: AlignedSpan,
}

/// Best of the aligned sentence and its coreference rewrites. Ties keep the
/// original sentence.
pub fn score_coref(
    doc: &Document,
    claim: &Claim,
    backend: &dyn EntailmentBackend,
    params: &ScoringParams,
) -> Result<CorefAlignment, NliError> {
    let sentence = score_sentences(doc, claim, backend)?;
    let original = &doc.sentences[sentence.index];
    let variants = coref_variants(doc, sentence.index, params);
    let mut aligned = AlignedSpan {
        granularity: Granularity::Sentence,
        sentence_start: sentence.index,
        sentence_end: sentence.index,
        premise_text: original.text.clone(),
        substitution: None,
    };
    let mut best = sentence.score;
    if !variants.is_empty() {
        let premises: Vec<&str> = variants.iter().map(|v| v.text.as_str()).collect();
        let scores = score_premises(&premises, &claim.text, "coref", backend)?;
        let mut winner = None;
        for (i, &s) in scores.iter().enumerate() {
            if s > best {
                best = s;
                winner = Some(i);
            }
        }
        if let Some(i) = winner {
            aligned.granularity = Granularity::CorefSentence;
            aligned.premise_text = variants[i].text.clone();
            aligned.substitution = Some(variants[i].substitution.clone());
        }
    }
    Ok(CorefAlignment {
        sentence,
        score: best,
        aligned,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowAlignment {
    pub score: f64,
    /// First sentence of the winning window.
    pub start: usize,
    /// Last sentence of the winning window, inclusive.
    pub end: usize,
    pub premise_text: String,
    /// True when the whole-document premise exceeded the backend budget and
    /// was scored as overlapping chunks.
    pub chunked: bool,
}

fn join(doc: &Document, start: usize, end_inclusive: usize) -> String {
    doc.sentences[start..=end_inclusive]
        .iter()
        .map(|s| s.text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Longest run of sentences starting at `start`, at most `max_len` long,
/// whose joined text fits `budget` together with `hypothesis`.
fn longest_fitting(
    doc: &Document,
    start: usize,
    max_len: usize,
    hypothesis: &str,
    budget: PremiseBudget,
) -> Option<usize> {
    (1..=max_len)
        .rev()
        .find(|&len| budget.fits(&join(doc, start, start + len - 1), hypothesis))
}

/// Best window of `k` consecutive sentences (joined with single spaces);
/// `k >= |D|` yields one window spanning the document.
///
/// Windows over the backend budget are shortened to the longest fitting
/// prefix. The single whole-document premise is instead replaced, when too
/// long, by maximal fitting windows advancing half a window at a time.
pub fn score_window(
    doc: &Document,
    claim: &Claim,
    k: usize,
    backend: &dyn EntailmentBackend,
) -> Result<WindowAlignment, NliError> {
    let n = doc.len();
    if n == 0 {
        return Err(NliError::backend(format!(
            "document '{}' has no sentences",
            doc.id
        )));
    }
    let k = k.clamp(1, n);
    let budget = backend.budget();
    let hyp = claim.text.as_str();
    let stage = if k == n { "document" } else { "window" };

    let mut spans: Vec<(usize, usize)> = Vec::new();
    let mut chunked = false;
    match budget {
        Some(b) if k == n && !b.fits(&join(doc, 0, n - 1), hyp) => {
            chunked = true;
            let mut i = 0;
            loop {
                let len = longest_fitting(doc, i, n - i, hyp, b).unwrap_or(1);
                spans.push((i, i + len - 1));
                if i + len >= n {
                    break;
                }
                i += (len / 2).max(1);
            }
        }
        Some(b) => {
            for i in 0..=n - k {
                let len = longest_fitting(doc, i, k, hyp, b).unwrap_or(1);
                spans.push((i, i + len - 1));
            }
        }
        None => spans.extend((0..=n - k).map(|i| (i, i + k - 1))),
    }

    let premises: Vec<String> = spans.iter().map(|&(s, e)| join(doc, s, e)).collect();
    let refs: Vec<&str> = premises.iter().map(String::as_str).collect();
    let scores = score_premises(&refs, hyp, stage, backend)?;
    let (score, best) = first_max(&scores);
    Ok(WindowAlignment {
        score,
        start: spans[best].0,
        end: spans[best].1,
        premise_text: premises[best].clone(),
        chunked,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiAlignment {
    pub score: f64,
    pub aligned: AlignedSpan,
    /// `None` when `|D| <= j`, where the window and document premises coincide.
    pub window_score: Option<f64>,
    pub document_score: f64,
    /// Winning chunk when the document premise was chunked.
    pub document_chunk: Option<(usize, usize)>,
}

/// Max of the best `j`-window and the whole document. Ties prefer the
/// document.
pub fn score_multi(
    doc: &Document,
    claim: &Claim,
    params: &ScoringParams,
    backend: &dyn EntailmentBackend,
) -> Result<MultiAlignment, NliError> {
    let n = doc.len();
    let window = if n > params.j {
        Some(score_window(doc, claim, params.j, backend)?)
    } else {
        None
    };
    let document = score_window(doc, claim, n, backend)?;
    let document_chunk = document.chunked.then_some((document.start, document.end));
    let document_span = AlignedSpan {
        granularity: Granularity::Document,
        sentence_start: 0,
        sentence_end: n - 1,
        premise_text: document.premise_text.clone(),
        substitution: None,
    };
    let (score, aligned) = match &window {
        Some(w) if w.score > document.score => (
            w.score,
            AlignedSpan {
                granularity: Granularity::Window,
                sentence_start: w.start,
                sentence_end: w.end,
                premise_text: w.premise_text.clone(),
                substitution: None,
            },
        ),
        _ => (document.score, document_span),
    };
    Ok(MultiAlignment {
        score,
        aligned,
        window_score: window.map(|w| w.score),
        document_score: document.score,
        document_chunk,
    })
}

/// Gated claim score: the coreference-stage score when it reaches
/// `params.threshold`, otherwise the multi-granularity score. Window and
/// document premises are only requested below the threshold.
pub fn score_claim(
    doc: &Document,
    claim: &Claim,
    params: &ScoringParams,
    backend: &dyn EntailmentBackend,
) -> Result<ClaimVerdict, NliError> {
    score_claim_inner(doc, claim, params, backend).map(|(v, _)| v)
}

fn score_claim_inner(
    doc: &Document,
    claim: &Claim,
    params: &ScoringParams,
    backend: &dyn EntailmentBackend,
) -> Result<(ClaimVerdict, Option<(usize, usize)>), NliError> {
    let span =
        tracing::debug_span!("claim", summary_id = %claim.summary_id, claim_index = claim.index);
    let _enter = span.enter();

    let coref = score_coref(doc, claim, backend, params)?;
    let mut sub_scores = SubScores {
        sentence: coref.sentence.score,
        coref: Some(coref.score),
        window: None,
        document: None,
    };
    if coref.score >= params.threshold {
        debug!(
            stage = "gate",
            coref = coref.score,
            "coref score reaches threshold"
        );
        return Ok((
            ClaimVerdict {
                claim: claim.clone(),
                score: coref.score,
                stage: Stage::Coref,
                aligned: coref.aligned,
                sub_scores,
            },
            None,
        ));
    }
    let multi = score_multi(doc, claim, params, backend)?;
    sub_scores.window = multi.window_score;
    sub_scores.document = Some(multi.document_score);
    let (score, aligned) = if params.monotone_gate && coref.score > multi.score {
        (coref.score, coref.aligned)
    } else {
        (multi.score, multi.aligned)
    };
    Ok((
        ClaimVerdict {
            claim: claim.clone(),
            score,
            stage: Stage::MultiGranularity,
            aligned,
            sub_scores,
        },
        multi.document_chunk,
    ))
}

fn mean(verdicts: &[ClaimVerdict]) -> f64 {
    verdicts.iter().map(|v| v.score).sum::<f64>() / verdicts.len() as f64
}

/// Mean of the gated claim scores, verdicts in claim order.
pub fn score_summary(
    doc: &Document,
    claims: &[Claim],
    params: &ScoringParams,
    backend: &dyn EntailmentBackend,
) -> Result<FactualityReport, ScoreError> {
    params.validate()?;
    let summary_id = claims
        .first()
        .map(|c| c.summary_id.clone())
        .ok_or_else(|| ScoreError::NoClaims(String::new()))?;
    let mut diagnostics = Diagnostics::from_coref(doc.coref_status);
    let mut verdicts = Vec::with_capacity(claims.len());
    for claim in claims {
        let (verdict, chunk) = score_claim_inner(doc, claim, params, backend)?;
        if let Some((chunk_start, chunk_end)) = chunk {
            diagnostics.chunked_document.push(ChunkedPremise {
                claim_index: claim.index,
                chunk_start,
                chunk_end,
            });
        }
        verdicts.push(verdict);
    }
    Ok(FactualityReport {
        summary_id,
        score: mean(&verdicts),
        verdicts,
        claims_fallback: false,
        params: *params,
        diagnostics,
    })
}

/// Reduced baselines without window or document premises. `ScoringMode::Fenice`
/// defers to [`score_summary`].
pub fn score_summary_ablation(
    doc: &Document,
    summary: &Summary,
    claims: &[Claim],
    mode: ScoringMode,
    backend: &dyn EntailmentBackend,
    params: &ScoringParams,
) -> Result<FactualityReport, ScoreError> {
    params.validate()?;
    let hypotheses: Vec<Claim> = match mode {
        ScoringMode::Fenice => return score_summary(doc, claims, params, backend),
        ScoringMode::NliSent => summary.sentence_claims(),
        ScoringMode::NliClaim | ScoringMode::NliCoref => claims.to_vec(),
    };
    if hypotheses.is_empty() {
        return Err(ScoreError::NoClaims(summary.id.clone()));
    }
    let mut verdicts = Vec::with_capacity(hypotheses.len());
    for claim in hypotheses {
        let span = tracing::debug_span!("claim", summary_id = %claim.summary_id, claim_index = claim.index);
        let _enter = span.enter();
        let verdict = if mode == ScoringMode::NliCoref {
            let c = score_coref(doc, &claim, backend, params)?;
            ClaimVerdict {
                claim,
                score: c.score,
                stage: Stage::Coref,
                aligned: c.aligned,
                sub_scores: SubScores {
                    sentence: c.sentence.score,
                    coref: Some(c.score),
                    window: None,
                    document: None,
                },
            }
        } else {
            let s = score_sentences(doc, &claim, backend)?;
            ClaimVerdict {
                claim,
                score: s.score,
                stage: Stage::Sentence,
                aligned: AlignedSpan {
                    granularity: Granularity::Sentence,
                    sentence_start: s.index,
                    sentence_end: s.index,
                    premise_text: doc.sentences[s.index].text.clone(),
                    substitution: None,
                },
                sub_scores: SubScores {
                    sentence: s.score,
                    coref: None,
                    window: None,
                    document: None,
                },
            }
        };
        verdicts.push(verdict);
    }
    Ok(FactualityReport {
        summary_id: summary.id.clone(),
        score: mean(&verdicts),
        verdicts,
        claims_fallback: false,
        params: *params,
        diagnostics: Diagnostics::from_coref(doc.coref_status),
    })
}
