//! C ABI over the claimfact scorer.
//!
//! Every function returns a [`CfStatus`]; on failure the message is available
//! from [`cf_last_error_message`] on the same thread. Strings handed out by
//! the library must be released with [`cf_string_free`], scorers with
//! [`cf_scorer_free`]. No entry point unwinds across the boundary: panics are
//! caught and reported as `CF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};

use claimfact::benchmark::{balanced_accuracy, tune_threshold, BenchmarkError, Label};
use claimfact::claim_eval::{easiness_precision, easiness_recall, harmonic_mean, rouge1_f1};
use claimfact::config::RunConfig;
use claimfact::error::exit_code;
use claimfact::io::{document_from_json, summary_from_json};
use claimfact::segment::RuleSegmenter;
use claimfact::{Document, Error, Pipeline, Summary};

/// Result of every call. Values 2–4 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Backend = 3,
    DegenerateLabels = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// Opaque scoring handle. Safe to share between threads.
pub struct CfScorer {
    pipeline: Pipeline,
    segmenter: RuleSegmenter,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let mut m = message.into();
    m.retain(|c| c != '\0');
    let c = CString::new(m).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Fail(CfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            exit_code::BACKEND => CfStatus::Backend,
            exit_code::DEGENERATE_LABELS => CfStatus::DegenerateLabels,
            _ => CfStatus::InvalidInput,
        };
        Fail(status, e.to_string())
    }
}

impl From<BenchmarkError> for Fail {
    fn from(e: BenchmarkError) -> Self {
        Error::from(e).into()
    }
}

fn invalid(message: impl Into<String>) -> Fail {
    Fail(CfStatus::InvalidInput, message.into())
}

/// Run `f`, recording its error or panic for `cf_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CfStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("panic: {msg}"));
            CfStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(CfStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(CfStatus::InvalidUtf8, format!("{name}: {e}")))
}

fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    // SAFETY: callers pass either null or a writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| Fail(CfStatus::NullPointer, format!("{name} is null")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: size_t, name: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail(CfStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| invalid("output contains a NUL byte"))
}

fn labels(raw: &[u8], name: &str) -> Result<Vec<Label>, Fail> {
    raw.iter()
        .enumerate()
        .map(|(i, &b)| match b {
            0 => Ok(Label::NotFactual),
            1 => Ok(Label::Factual),
            other => Err(invalid(format!("{name}[{i}] = {other}; expected 0 or 1"))),
        })
        .collect()
}

/// Library version as a static NUL-terminated string; do not free.
#[no_mangle]
pub extern "C" fn cf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next library call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn cf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn cf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a scorer from a TOML configuration (same format as the CLI's
/// `--config` file). Null or empty `config_toml` uses the defaults: mock
/// NLI, summary sentences as claims, rule-based coreference.
///
/// # Safety
/// `config_toml` must be null or a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cf_scorer_new(
    config_toml: *const c_char,
    out: *mut *mut CfScorer,
) -> CfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let config = if config_toml.is_null() {
            RunConfig::default()
        } else {
            RunConfig::from_toml(str_arg(config_toml, "config_toml")?)?
        };
        config.validate()?;
        let scorer = CfScorer {
            pipeline: Pipeline::from_config(&config)?,
            segmenter: config.segmenter(),
        };
        *out = Box::into_raw(Box::new(scorer));
        Ok(())
    })
}

/// Release a scorer. Null is ignored.
///
/// # Safety
/// `scorer` must come from `cf_scorer_new` and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn cf_scorer_free(scorer: *mut CfScorer) {
    if !scorer.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(scorer))));
    }
}

fn score_pair(
    scorer: &CfScorer,
    doc: Document,
    summary: Summary,
) -> Result<claimfact::FactualityReport, Fail> {
    let doc = scorer.pipeline.prepare(doc);
    Ok(scorer.pipeline.score(&doc, &summary)?)
}

/// Score one pair given as JSON objects in the CLI's input formats and write
/// the report (one JSON line, without newline) to `*out_report_json`. The
/// summary's `document_id` may be omitted; if present it must match.
///
/// # Safety
/// Pointers must be valid C strings / writable locations; `scorer` must be live.
#[no_mangle]
pub unsafe extern "C" fn cf_scorer_score(
    scorer: *const CfScorer,
    document_json: *const c_char,
    summary_json: *const c_char,
    out_report_json: *mut *mut c_char,
) -> CfStatus {
    guard(|| {
        let out = out_arg(out_report_json, "out_report_json")?;
        *out = ptr::null_mut();
        let scorer = scorer
            .as_ref()
            .ok_or_else(|| Fail(CfStatus::NullPointer, "scorer is null".into()))?;
        let doc = document_from_json(str_arg(document_json, "document_json")?, &scorer.segmenter)?;
        let mut summary =
            summary_from_json(str_arg(summary_json, "summary_json")?, &scorer.segmenter)?;
        if summary.document_id.is_empty() {
            summary.document_id = doc.id.clone();
        }
        let report = score_pair(scorer, doc, summary)?;
        *out = into_c_string(report.to_json_line())?;
        Ok(())
    })
}

/// Score plain document and summary text; writes the summary score.
///
/// # Safety
/// Pointers must be valid C strings / writable locations; `scorer` must be live.
#[no_mangle]
pub unsafe extern "C" fn cf_scorer_score_text(
    scorer: *const CfScorer,
    document_text: *const c_char,
    summary_text: *const c_char,
    out_score: *mut f64,
) -> CfStatus {
    guard(|| {
        let out = out_arg(out_score, "out_score")?;
        let scorer = scorer
            .as_ref()
            .ok_or_else(|| Fail(CfStatus::NullPointer, "scorer is null".into()))?;
        let doc = Document::new(
            "document",
            str_arg(document_text, "document_text")?,
            &scorer.segmenter,
        )
        .map_err(Error::from)?;
        let summary = Summary::new(
            "summary",
            "document",
            str_arg(summary_text, "summary_text")?,
            &scorer.segmenter,
        )
        .map_err(Error::from)?;
        *out = score_pair(scorer, doc, summary)?.score;
        Ok(())
    })
}

/// Unigram ROUGE-1 F1 between two texts.
///
/// # Safety
/// `a` and `b` must be valid C strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cf_rouge1_f1(
    a: *const c_char,
    b: *const c_char,
    out: *mut f64,
) -> CfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = rouge1_f1(str_arg(a, "a")?, str_arg(b, "b")?);
        Ok(())
    })
}

/// Easiness precision, recall and F1 between two claim sets given as JSON
/// arrays of strings. Both sets must be non-empty.
///
/// # Safety
/// String arguments must be valid C strings; out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn cf_easiness(
    system_claims_json: *const c_char,
    human_claims_json: *const c_char,
    out_precision: *mut f64,
    out_recall: *mut f64,
    out_f1: *mut f64,
) -> CfStatus {
    guard(|| {
        let parse = |p, name: &str| -> Result<Vec<String>, Fail> {
            let v: Vec<String> = serde_json::from_str(str_arg(p, name)?)
                .map_err(|e| invalid(format!("{name}: {e}")))?;
            if v.is_empty() {
                return Err(invalid(format!("{name}: empty claim set")));
            }
            Ok(v)
        };
        let system = parse(system_claims_json, "system_claims_json")?;
        let human = parse(human_claims_json, "human_claims_json")?;
        let (po, ro, fo) = (
            out_arg(out_precision, "out_precision")?,
            out_arg(out_recall, "out_recall")?,
            out_arg(out_f1, "out_f1")?,
        );
        let p = easiness_precision(&system, &human).map_err(Error::from)?;
        let r = easiness_recall(&system, &human).map_err(Error::from)?;
        *po = p;
        *ro = r;
        *fo = harmonic_mean(p, r);
        Ok(())
    })
}

/// Balanced accuracy of 0/1 predictions against 0/1 gold labels (1 =
/// factual). Fails with `CF_STATUS_DEGENERATE_LABELS` if the golds contain
/// a single class.
///
/// # Safety
/// `predictions` and `golds` must point to `len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn cf_balanced_accuracy(
    predictions: *const u8,
    golds: *const u8,
    len: size_t,
    out: *mut f64,
) -> CfStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = labels(slice_arg(predictions, len, "predictions")?, "predictions")?;
        let g = labels(slice_arg(golds, len, "golds")?, "golds")?;
        *out = balanced_accuracy(&p, &g)?;
        Ok(())
    })
}

/// Threshold maximising balanced accuracy on (scores, golds); a score at or
/// above the threshold counts as factual.
///
/// # Safety
/// `scores` must point to `len` doubles and `golds` to `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn cf_tune_threshold(
    scores: *const f64,
    golds: *const u8,
    len: size_t,
    out_threshold: *mut f64,
    out_balanced_accuracy: *mut f64,
) -> CfStatus {
    guard(|| {
        let t = out_arg(out_threshold, "out_threshold")?;
        let ba = out_arg(out_balanced_accuracy, "out_balanced_accuracy")?;
        let s = slice_arg(scores, len, "scores")?;
        let g = labels(slice_arg(golds, len, "golds")?, "golds")?;
        let r = tune_threshold(s, &g)?;
        *t = r.threshold;
        *ba = r.balanced_accuracy;
        Ok(())
    })
}
