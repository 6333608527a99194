#ifndef HITPREDICT_H
#define HITPREDICT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HpStatus {
  HP_STATUS_OK = 0,
  HP_STATUS_NULL_POINTER = 1,
  HP_STATUS_INVALID_UTF8 = 2,
  HP_STATUS_IO = 3,
  HP_STATUS_PARSE = 4,
  HP_STATUS_INVALID_INPUT = 5,
  HP_STATUS_SCHEMA_MISMATCH = 6,
  HP_STATUS_UNSUPPORTED_VERSION = 7,
  HP_STATUS_PANIC = 8,
} HpStatus;

/**
 * Opaque trained pipeline.
 */
typedef struct HpPipeline HpPipeline;

/**
 * Ten summary statistics of a series. Kurtosis is not excess kurtosis.
 */
typedef struct HpStats {
  double mean;
  double variance;
  double skewness;
  double kurtosis;
  double stdev;
  double p80;
  double min;
  double max;
  double range;
  double median;
} HpStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *hp_last_error_message(void);

/**
 * Load a pipeline saved by `hitpredict train`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HpStatus hp_pipeline_load(const char *path, struct HpPipeline **out);

/**
 * Parse a pipeline from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HpStatus hp_pipeline_from_json(const char *json, struct HpPipeline **out);

/**
 * Release a pipeline. Null is accepted.
 *
 * # Safety
 * `pipeline` must come from this library and not be used afterwards.
 */
void hp_pipeline_free(struct HpPipeline *pipeline);

/**
 * Number of input features a row passed to [`hp_pipeline_predict_row`] must have.
 *
 * # Safety
 * `pipeline` and `out` must be valid pointers.
 */
enum HpStatus hp_pipeline_input_len(const struct HpPipeline *pipeline, size_t *out);

/**
 * Score a raw (unstandardized) row laid out like [`hp_feature_name`].
 * `is_hit` receives 1 for a predicted hit and 0 otherwise.
 *
 * # Safety
 * `values` must hold `len` doubles; the other pointers must be valid.
 */
enum HpStatus hp_pipeline_predict_row(const struct HpPipeline *pipeline,
                                      const double *values,
                                      size_t len,
                                      double *score,
                                      int32_t *is_hit);

/**
 * Score one song analysis given as JSON text.
 *
 * # Safety
 * `analysis_json` must be a NUL-terminated string; the other pointers must be valid.
 */
enum HpStatus hp_pipeline_predict_analysis(const struct HpPipeline *pipeline,
                                           const char *analysis_json,
                                           double *score,
                                           int32_t *is_hit);

/**
 * Length of the fixed feature schema.
 */
size_t hp_feature_count(void);

/**
 * Name of feature `index`, or null when out of range. The string is static.
 */
const char *hp_feature_name(size_t index);

/**
 * Extract the feature vector of an analysis into `out`, which must hold
 * exactly [`hp_feature_count`] doubles.
 *
 * # Safety
 * `analysis_json` must be a NUL-terminated string and `out` must hold `len` doubles.
 */
enum HpStatus hp_feature_vector(const char *analysis_json, double *out, size_t len);

/**
 * Area under the ROC curve. A nonzero label marks a hit.
 *
 * # Safety
 * `labels` and `scores` must hold `n` elements; `out` must be valid.
 */
enum HpStatus hp_roc_auc(const uint8_t *labels, const double *scores, size_t n, double *out);

/**
 * Two-sided p-value of the Wilcoxon signed-rank test on paired samples.
 *
 * # Safety
 * `a` and `b` must hold `n` doubles; `out` must be valid.
 */
enum HpStatus hp_wilcoxon_p(const double *a, const double *b, size_t n, double *out);

/**
 * Summary statistics of a non-empty finite series.
 *
 * # Safety
 * `series` must hold `n` doubles; `out` must be valid.
 */
enum HpStatus hp_descriptive_stats(const double *series, size_t n, struct HpStats *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HITPREDICT_H */
