/* SPDX-License-Identifier: Apache-2.0 */

#ifndef LINGPAT_H
#define LINGPAT_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define LINGPAT_LEVEL_WORD 1

#define LINGPAT_LEVEL_PHRASE 2

#define LINGPAT_LEVEL_SENTENCE 4

#define LINGPAT_LEVEL_BUG_REPORT 8

#define LINGPAT_LEVEL_ALL 15

/**
 * Result code of every fallible call.
 */
typedef enum {
  LINGPAT_STATUS_OK = 0,
  LINGPAT_STATUS_NULL_ARGUMENT = 1,
  LINGPAT_STATUS_INVALID_UTF8 = 2,
  LINGPAT_STATUS_INVALID_ARGUMENT = 3,
  LINGPAT_STATUS_IO_ERROR = 4,
  LINGPAT_STATUS_PARSE_ERROR = 5,
  LINGPAT_STATUS_LAYOUT_MISMATCH = 6,
  LINGPAT_STATUS_PANIC = 7,
} LingpatStatus;

/**
 * A trained linear classifier loaded from a model file.
 */
typedef struct LingpatModel LingpatModel;

/**
 * Lexicon plus pattern set, ready to process reports.
 */
typedef struct LingpatPipeline LingpatPipeline;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *lingpat_version(void);

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next lingpat call on the same thread.
 */
const char *lingpat_last_error(void);

/**
 * Pipeline with the built-in lexicon and pattern set.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
LingpatStatus lingpat_pipeline_new_default(LingpatPipeline **out);

/**
 * Pipeline from a lexicon file and a pattern-set file. A NULL path selects
 * the built-in resource.
 *
 * # Safety
 * Paths must be NULL or NUL-terminated strings. `out` must be writable.
 */
LingpatStatus lingpat_pipeline_load(const char *lexicon_path,
                                    const char *patterns_path,
                                    LingpatPipeline **out);

/**
 * # Safety
 * `pipeline` must be NULL or a handle from this library not yet freed.
 */
void lingpat_pipeline_free(LingpatPipeline *pipeline);

/**
 * Hex layout hash of the pipeline's pattern set.
 *
 * # Safety
 * `pipeline` must be a live handle and `out` writable.
 */
LingpatStatus lingpat_pipeline_layout_hash(const LingpatPipeline *pipeline, char **out);

/**
 * Match one report and return the match report as JSON. `id` may be NULL.
 * Either `title` or `body` may be NULL but not both.
 *
 * # Safety
 * String arguments must be NULL or NUL-terminated. `out` must be writable.
 */
LingpatStatus lingpat_match_json(const LingpatPipeline *pipeline,
                                 const char *id,
                                 const char *title,
                                 const char *body,
                                 char **out);

/**
 * Flag a report as concurrency-related if any level in `level_mask` has a
 * pattern hit. Writes 1 or 0 to `out_positive`.
 *
 * # Safety
 * String arguments must be NULL or NUL-terminated. `out_positive` must be
 * writable.
 */
LingpatStatus lingpat_classify_levels(const LingpatPipeline *pipeline,
                                      const char *title,
                                      const char *body,
                                      uint32_t level_mask,
                                      int *out_positive);

/**
 * Load a trained model file.
 *
 * # Safety
 * `path` must be NUL-terminated and `out` writable.
 */
LingpatStatus lingpat_model_load(const char *path, LingpatModel **out);

/**
 * # Safety
 * `model` must be NULL or a handle from this library not yet freed.
 */
void lingpat_model_free(LingpatModel *model);

/**
 * Score a report with a trained model. The model must have been trained on
 * a level subset of the pipeline's pattern set.
 *
 * # Safety
 * Handles must be live. String arguments must be NULL or NUL-terminated.
 * `out_score` and `out_positive` must be writable.
 */
LingpatStatus lingpat_model_classify(const LingpatModel *model,
                                     const LingpatPipeline *pipeline,
                                     const char *title,
                                     const char *body,
                                     double *out_score,
                                     int *out_positive);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a string from this library not yet freed.
 */
void lingpat_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LINGPAT_H */
