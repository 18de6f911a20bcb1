#ifndef NLES_H
#define NLES_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NlesStatus {
  NLES_STATUS_OK = 0,
  NLES_STATUS_NULL_POINTER = 1,
  NLES_STATUS_INVALID_UTF8 = 2,
  NLES_STATUS_CONFIG = 3,
  NLES_STATUS_INVALID_PARAMETER = 4,
  NLES_STATUS_DIVERGENCE = 5,
  NLES_STATUS_IO = 6,
  NLES_STATUS_BUFFER_TOO_SMALL = 7,
  NLES_STATUS_NUMERICAL = 8,
  NLES_STATUS_PANIC = 9,
} NlesStatus;

/**
 * Columns of an error series.
 */
typedef enum NlesSeriesColumn {
  NLES_SERIES_COLUMN_TIME = 0,
  NLES_SERIES_COLUMN_L2_ABS = 1,
  NLES_SERIES_COLUMN_L2_REL = 2,
  NLES_SERIES_COLUMN_H1_REL = 3,
  NLES_SERIES_COLUMN_ENERGY_RESIDUAL = 4,
} NlesSeriesColumn;

/**
 * Opaque experiment handle.
 */
typedef struct NlesExperiment NlesExperiment;

/**
 * Opaque error-series handle.
 */
typedef struct NlesSeries NlesSeries;

/**
 * Synchronization conditions evaluated for the nudged configuration.
 * `*_lhs` fields are NaN when the condition does not apply.
 */
typedef struct NlesConditionReport {
  double grashof;
  double mu;
  double mu_threshold;
  double sync_h_lhs;
  double well_posed_h_lhs;
  double nu;
  /**
   * Number of conditions reported as violated.
   */
  uint32_t warnings;
} NlesConditionReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *nles_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nles_version(void);

/**
 * Parses an experiment document (TOML). On success `*out` owns a new handle.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NlesStatus nles_experiment_parse(const char *text, struct NlesExperiment **out);

/**
 * Writes the canonical document of `exp` into `buf` (NUL-terminated).
 * `*needed` receives the required size including the terminator; a
 * too-small buffer yields `BUFFER_TOO_SMALL` and leaves `buf` untouched.
 *
 * # Safety
 * `buf` must hold `len` bytes (or be NULL with `len == 0`).
 */
enum NlesStatus nles_experiment_serialize(const struct NlesExperiment *exp,
                                          char *buf,
                                          size_t len,
                                          size_t *needed);

/**
 * # Safety
 * `exp` must come from [`nles_experiment_parse`] and not be used afterwards.
 */
void nles_experiment_free(struct NlesExperiment *exp);

/**
 * Seeds above `i64::MAX` are rejected so the experiment stays serializable.
 *
 * # Safety
 * `exp` must be a live handle.
 */
enum NlesStatus nles_experiment_set_seed(struct NlesExperiment *exp, uint64_t seed);

/**
 * Sets the final time of both runs.
 *
 * # Safety
 * `exp` must be a live handle.
 */
enum NlesStatus nles_experiment_set_t_end(struct NlesExperiment *exp, double t_end);

/**
 * Sets the turbulence viscosity of the nudged run.
 *
 * # Safety
 * `exp` must be a live handle.
 */
enum NlesStatus nles_experiment_set_nu_bar(struct NlesExperiment *exp, double nu_bar);

/**
 * Runs the twin experiment. On success `*out` owns a new series handle.
 *
 * # Safety
 * `exp` must be a live handle and `out` a valid pointer.
 */
enum NlesStatus nles_run_twin(const struct NlesExperiment *exp, struct NlesSeries **out);

/**
 * Evaluates the synchronization conditions of the nudged configuration.
 *
 * # Safety
 * `exp` must be a live handle and `out` a valid pointer.
 */
enum NlesStatus nles_validate_conditions(const struct NlesExperiment *exp,
                                         struct NlesConditionReport *out);

/**
 * Observed wave vectors (counting `k` and `-k`, excluding 0) of a Fourier
 * truncation with cutoff `k_c` on an `n^dim` grid, within the dealiased band.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum NlesStatus nles_observed_mode_count(uint32_t dim, uint32_t n, uint32_t k_c, size_t *out);

/**
 * Number of records in `series` (0 for NULL).
 *
 * # Safety
 * `series` must be NULL or a live handle.
 */
size_t nles_series_len(const struct NlesSeries *series);

/**
 * Copies one column into `buf`, which must hold `len >= nles_series_len` values.
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
enum NlesStatus nles_series_column(const struct NlesSeries *series,
                                   enum NlesSeriesColumn column,
                                   double *buf,
                                   size_t len);

/**
 * Time average of the absolute L² error over the final `tail_fraction`.
 *
 * # Safety
 * `series` must be a live handle and `out` a valid pointer.
 */
enum NlesStatus nles_series_plateau(const struct NlesSeries *series,
                                    double tail_fraction,
                                    double *out);

/**
 * Exponential decay rate of the absolute L² error before the plateau.
 *
 * # Safety
 * `series` must be a live handle and `out` a valid pointer.
 */
enum NlesStatus nles_series_decay_rate(const struct NlesSeries *series, double *out);

/**
 * Writes the series as CSV.
 *
 * # Safety
 * `series` must be a live handle and `path` a NUL-terminated string.
 */
enum NlesStatus nles_series_write_csv(const struct NlesSeries *series, const char *path);

/**
 * # Safety
 * `series` must come from this library and not be used afterwards.
 */
void nles_series_free(struct NlesSeries *series);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NLES_H */
