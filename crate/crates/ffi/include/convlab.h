#ifndef CONVLAB_H
#define CONVLAB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  CONVLAB_STATUS_OK = 0,
  CONVLAB_STATUS_NULL_ARGUMENT = 1,
  CONVLAB_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON, bad expression, unknown built-in name.
   */
  CONVLAB_STATUS_CONFIG = 3,
  /**
   * Index outside the window, mismatched windows, empty window.
   */
  CONVLAB_STATUS_WINDOW = 4,
  /**
   * The operation is not available for this norm or set.
   */
  CONVLAB_STATUS_UNSUPPORTED = 5,
  /**
   * Any other failure inside a computation.
   */
  CONVLAB_STATUS_COMPUTATION = 6,
  /**
   * A bug: the library panicked. The handle arguments are left untouched.
   */
  CONVLAB_STATUS_PANIC = 7,
} ConvlabStatus;

/**
 * A norm on a fixed coordinate window.
 */
typedef struct ConvlabNorm ConvlabNorm;

/**
 * The outcome of a scenario or built-in reproduction.
 */
typedef struct ConvlabReport ConvlabReport;

/**
 * A finitely supported rational vector; also read as a functional.
 */
typedef struct ConvlabVector ConvlabVector;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string.
 */
const char *convlab_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *convlab_last_error(void);

/**
 * Frees a string returned by the library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void convlab_string_free(char *s);

/**
 * Parses a norm in the scenario syntax, e.g. `{"kind":"ell1"}`, on the
 * coordinate window `lo..=hi`.
 *
 * # Safety
 * `json` must be a valid C string and `out_norm` writable.
 */
ConvlabStatus convlab_norm_parse(const char *json, size_t lo, size_t hi, ConvlabNorm **out_norm);

/**
 * # Safety
 * `norm` must be null or a handle from [`convlab_norm_parse`].
 */
void convlab_norm_free(ConvlabNorm *norm);

/**
 * A zero vector on the window `lo..=hi`.
 *
 * # Safety
 * `out_vec` must be writable.
 */
ConvlabStatus convlab_vector_new(size_t lo, size_t hi, ConvlabVector **out_vec);

/**
 * Sets coordinate `index` to a rational written as `p/q`, an integer or a
 * decimal.
 *
 * # Safety
 * `vec` must be a live vector handle and `value` a valid C string.
 */
ConvlabStatus convlab_vector_set(ConvlabVector *vec, size_t index, const char *value);

/**
 * # Safety
 * `vec` must be null or a handle from [`convlab_vector_new`].
 */
void convlab_vector_free(ConvlabVector *vec);

/**
 * `||x||` in the given norm. `exact` may be null; otherwise it receives a
 * string to free with [`convlab_string_free`].
 *
 * # Safety
 * Handles must be live; `value` writable; `exact` null or writable.
 */
ConvlabStatus convlab_norm_eval(const ConvlabNorm *norm,
                                const ConvlabVector *x,
                                double *value,
                                char **exact);

/**
 * Dual norm of the functional with the coefficients of `f`.
 *
 * # Safety
 * As for [`convlab_norm_eval`].
 */
ConvlabStatus convlab_dual_norm_eval(const ConvlabNorm *norm,
                                     const ConvlabVector *f,
                                     double *value,
                                     char **exact);

/**
 * Runs a scenario given as JSON text.
 *
 * # Safety
 * `json` must be a valid C string and `out_report` writable.
 */
ConvlabStatus convlab_run_scenario_json(const char *json, ConvlabReport **out_report);

/**
 * Runs a built-in reproduction by name.
 *
 * # Safety
 * `name` must be a valid C string and `out_report` writable.
 */
ConvlabStatus convlab_repro(const char *name, ConvlabReport **out_report);

/**
 * The report as pretty JSON; free with [`convlab_string_free`].
 *
 * # Safety
 * `report` must be live and `out_json` writable.
 */
ConvlabStatus convlab_report_json(const ConvlabReport *report, char **out_json);

/**
 * 1 if every check matched its expectation, 0 if not, -1 for a null handle.
 *
 * # Safety
 * `report` must be null or live.
 */
int32_t convlab_report_all_matched(const ConvlabReport *report);

/**
 * # Safety
 * `report` must be null or a handle from this library.
 */
void convlab_report_free(ConvlabReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CONVLAB_H */
