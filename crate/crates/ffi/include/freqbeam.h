#ifndef FREQBEAM_H
#define FREQBEAM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum FbStatus {
  FB_STATUS_OK = 0,
  /**
   * A required pointer was NULL or a buffer was too small.
   */
  FB_STATUS_NULL_OR_BUFFER = 1,
  /**
   * Rejected parameter or malformed configuration.
   */
  FB_STATUS_CONFIG = 2,
  /**
   * Numerical failure: normalization, convergence, resolution.
   */
  FB_STATUS_NUMERICAL = 3,
  FB_STATUS_IO = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  FB_STATUS_PANIC = 5,
} FbStatus;

/**
 * Correlation measurement geometry.
 */
typedef enum FbMode {
  /**
   * Red versus blue port.
   */
  FB_MODE_CROSS = 0,
  /**
   * Two detectors on the blue port.
   */
  FB_MODE_AUTO = 1,
} FbMode;

/**
 * Histogram partition selector.
 */
typedef enum FbPartition {
  FB_PARTITION_IN_SYNC = 0,
  FB_PARTITION_NORMALIZATION = 1,
} FbPartition;

/**
 * Opaque experiment configuration.
 */
typedef struct FbConfig FbConfig;

/**
 * Opaque fit result.
 */
typedef struct FbFit FbFit;

/**
 * Opaque coincidence histogram.
 */
typedef struct FbHistogram FbHistogram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *fb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fb_version(void);

/**
 * Default configuration (calibrated pair rate, balanced splitter, 1 h).
 */
struct FbConfig *fb_config_new_default(void);

/**
 * Parses `key = value` configuration text.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FbStatus fb_config_parse(const char *text, struct FbConfig **out);

/**
 * Sets ΔΩ (rad/s) by moving the splitter pump separation.
 *
 * # Safety
 * `cfg` must be a live handle or NULL.
 */
enum FbStatus fb_config_set_detuning(struct FbConfig *cfg, double detuning_rad_s);

/**
 * Sets the splitter ideality α, the integration time (s) and the seed.
 *
 * # Safety
 * `cfg` must be a live handle or NULL.
 */
enum FbStatus fb_config_set_run(struct FbConfig *cfg,
                                double visibility,
                                double duration_s,
                                uint64_t seed);

/**
 * # Safety
 * `cfg` must come from this library and not be used afterwards.
 */
void fb_config_free(struct FbConfig *cfg);

/**
 * Event-level Monte Carlo acquisition. `threads` = 0 uses the global pool;
 * the result does not depend on it.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum FbStatus fb_simulate(const struct FbConfig *cfg,
                          enum FbMode mode,
                          size_t threads,
                          struct FbHistogram **out);

/**
 * Poisson draw of the expected histogram.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer.
 */
enum FbStatus fb_synthetic_histogram(const struct FbConfig *cfg,
                                     enum FbMode mode,
                                     uint64_t seed,
                                     struct FbHistogram **out);

/**
 * Number of delay bins; 0 for a NULL handle.
 *
 * # Safety
 * `hist` must be a live handle or NULL.
 */
size_t fb_histogram_n_bins(const struct FbHistogram *hist);

/**
 * Copies one partition's counts and the bin centers (s) into caller
 * buffers of length `len`, which must be at least the bin count.
 * `centers` may be NULL.
 *
 * # Safety
 * Buffers must hold `len` elements.
 */
enum FbStatus fb_histogram_copy(const struct FbHistogram *hist,
                                enum FbPartition partition,
                                uint64_t *counts,
                                double *centers,
                                size_t len);

/**
 * # Safety
 * `hist` must come from this library and not be used afterwards.
 */
void fb_histogram_free(struct FbHistogram *hist);

/**
 * Normalizes and fits a histogram. The splitter efficiency and jitter come
 * from `cfg`.
 *
 * # Safety
 * Handles must be live and `out` a valid pointer.
 */
enum FbStatus fb_fit(const struct FbHistogram *hist,
                     const struct FbConfig *cfg,
                     struct FbFit **out);

/**
 * Estimate and 1σ error of parameter `index`: 0 amplitude, 1 linewidth
 * (rad/s), 2 detuning (rad/s), 3 visibility, 4 offset (s), 5 background.
 *
 * # Safety
 * `fit` must be a live handle; out-pointers must be valid.
 */
enum FbStatus fb_fit_estimate(const struct FbFit *fit, size_t index, double *value, double *sigma);

/**
 * Raw visibility from the bins adjacent to τ = 0; NaN when undefined.
 *
 * # Safety
 * `fit` must be a live handle; out-pointers must be valid.
 */
enum FbStatus fb_fit_raw_visibility(const struct FbFit *fit, double *value, double *sigma);

/**
 * χ²/dof of the fit; NaN for a NULL handle.
 *
 * # Safety
 * `fit` must be a live handle or NULL.
 */
double fb_fit_reduced_chi2(const struct FbFit *fit);

/**
 * # Safety
 * `fit` must come from this library and not be used afterwards.
 */
void fb_fit_free(struct FbFit *fit);

/**
 * Closed-form cross-port G² with visibility α at `n` delays (s).
 *
 * # Safety
 * `tau` and `out` must hold `n` elements.
 */
enum FbStatus fb_g2_cross_analytic(double linewidth_rad_s,
                                   double detuning_rad_s,
                                   double visibility,
                                   const double *tau,
                                   size_t n,
                                   double *out);

/**
 * Splitter pump separation Ω = 2π·2m·FSR (rad/s) matching resonances ±m.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FbStatus fb_pump_separation_from_fsr(double fsr_hz, int32_t m, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FREQBEAM_H */
