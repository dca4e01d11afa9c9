#ifndef CLAIMFACT_H
#define CLAIMFACT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Result of every call. Values 2–4 match the CLI exit codes.
 */
typedef enum CfStatus {
  CF_STATUS_OK = 0,
  CF_STATUS_NULL_POINTER = 1,
  CF_STATUS_INVALID_INPUT = 2,
  CF_STATUS_BACKEND = 3,
  CF_STATUS_DEGENERATE_LABELS = 4,
  CF_STATUS_INVALID_UTF8 = 5,
  CF_STATUS_PANIC = 6,
} CfStatus;

/**
 * Opaque scoring handle. Safe to share between threads.
 */
typedef struct CfScorer CfScorer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string; do not free.
 */
const char *cf_version(void);

/**
 * Message for the last failed call on this thread, or null. The pointer is
 * valid until the next library call on the same thread; do not free.
 */
const char *cf_last_error_message(void);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void cf_string_free(char *s);

/**
 * Build a scorer from a TOML configuration (same format as the CLI's
 * `--config` file). Null or empty `config_toml` uses the defaults: mock
 * NLI, summary sentences as claims, rule-based coreference.
 *
 * # Safety
 * `config_toml` must be null or a valid C string; `out` must be writable.
 */
enum CfStatus cf_scorer_new(const char *config_toml, struct CfScorer **out);

/**
 * Release a scorer. Null is ignored.
 *
 * # Safety
 * `scorer` must come from `cf_scorer_new` and not have been freed already.
 */
void cf_scorer_free(struct CfScorer *scorer);

/**
 * Score one pair given as JSON objects in the CLI's input formats and write
 * the report (one JSON line, without newline) to `*out_report_json`. The
 * summary's `document_id` may be omitted; if present it must match.
 *
 * # Safety
 * Pointers must be valid C strings / writable locations; `scorer` must be live.
 */
enum CfStatus cf_scorer_score(const struct CfScorer *scorer,
                              const char *document_json,
                              const char *summary_json,
                              char **out_report_json);

/**
 * Score plain document and summary text; writes the summary score.
 *
 * # Safety
 * Pointers must be valid C strings / writable locations; `scorer` must be live.
 */
enum CfStatus cf_scorer_score_text(const struct CfScorer *scorer,
                                   const char *document_text,
                                   const char *summary_text,
                                   double *out_score);

/**
 * Unigram ROUGE-1 F1 between two texts.
 *
 * # Safety
 * `a` and `b` must be valid C strings; `out` must be writable.
 */
enum CfStatus cf_rouge1_f1(const char *a, const char *b, double *out);

/**
 * Easiness precision, recall and F1 between two claim sets given as JSON
 * arrays of strings. Both sets must be non-empty.
 *
 * # Safety
 * String arguments must be valid C strings; out pointers must be writable.
 */
enum CfStatus cf_easiness(const char *system_claims_json,
                          const char *human_claims_json,
                          double *out_precision,
                          double *out_recall,
                          double *out_f1);

/**
 * Balanced accuracy of 0/1 predictions against 0/1 gold labels (1 =
 * factual). Fails with `CF_STATUS_DEGENERATE_LABELS` if the golds contain
 * a single class.
 *
 * # Safety
 * `predictions` and `golds` must point to `len` readable bytes.
 */
enum CfStatus cf_balanced_accuracy(const uint8_t *predictions,
                                   const uint8_t *golds,
                                   size_t len,
                                   double *out);

/**
 * Threshold maximising balanced accuracy on (scores, golds); a score at or
 * above the threshold counts as factual.
 *
 * # Safety
 * `scores` must point to `len` doubles and `golds` to `len` bytes.
 */
enum CfStatus cf_tune_threshold(const double *scores,
                                const uint8_t *golds,
                                size_t len,
                                double *out_threshold,
                                double *out_balanced_accuracy);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CLAIMFACT_H */
