#ifndef HYPOCERT_H
#define HYPOCERT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call.
 */
typedef enum HcStatus {
  HC_STATUS_OK = 0,
  HC_STATUS_NULL_POINTER = 1,
  HC_STATUS_INVALID_UTF8 = 2,
  HC_STATUS_PARSE = 3,
  HC_STATUS_INVALID_SYSTEM = 4,
  HC_STATUS_KALMAN_VIOLATED = 5,
  HC_STATUS_NUMERICAL = 6,
  HC_STATUS_PANIC = 7,
} HcStatus;

/**
 * Overall verdict of a report.
 */
typedef enum HcVerdict {
  HC_VERDICT_CERTIFIED = 0,
  HC_VERDICT_CERTIFIED_WITH_FALLBACK = 1,
  HC_VERDICT_FAILED = 2,
} HcVerdict;

/**
 * Result of the Kalman analysis.
 */
typedef struct HcKalman HcKalman;

/**
 * Analysis report, with or without numerical verification.
 */
typedef struct HcReport HcReport;

/**
 * A loaded system.
 */
typedef struct HcSystem HcSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *hc_last_error_message(void);

/**
 * Parses a JSON system file.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum HcStatus hc_system_from_json(const char *json, struct HcSystem **out);

/**
 * Loads a built-in model. `params` is null or a comma-separated list of
 * `name=value` overrides.
 *
 * # Safety
 * `name` and non-null `params` must be NUL-terminated strings; `out` must
 * be writable.
 */
enum HcStatus hc_system_from_zoo(const char *name, const char *params, struct HcSystem **out);

/**
 * Releases a system. Null is ignored.
 *
 * # Safety
 * `sys` must come from an `hc_system_from_*` call and not be used again.
 */
void hc_system_free(struct HcSystem *sys);

/**
 * Dimension `n` of a system, 0 for null.
 *
 * # Safety
 * `sys` must be null or a live system handle.
 */
size_t hc_system_dimension(const struct HcSystem *sys);

/**
 * Decides the Kalman condition up to order `kmax` (0 selects `n − 1`) and
 * estimates α and β.
 *
 * # Safety
 * `sys` must be a live system handle; `out` must be writable.
 */
enum HcStatus hc_kalman_check(const struct HcSystem *sys, size_t kmax, struct HcKalman **out);

/**
 * Whether the Kalman condition holds.
 *
 * # Safety
 * `k` must be null or a live handle.
 */
bool hc_kalman_holds(const struct HcKalman *k);

/**
 * Smallest order `K`, or −1 when the condition fails.
 *
 * # Safety
 * `k` must be null or a live handle.
 */
int32_t hc_kalman_order(const struct HcKalman *k);

/**
 * Kalman exponent α, or −1 when unavailable.
 *
 * # Safety
 * `k` must be null or a live handle.
 */
int32_t hc_kalman_alpha(const struct HcKalman *k);

/**
 * Kalman exponent β, or −1 when unavailable.
 *
 * # Safety
 * `k` must be null or a live handle.
 */
int32_t hc_kalman_beta(const struct HcKalman *k);

/**
 * Releases a Kalman result. Null is ignored.
 *
 * # Safety
 * `k` must come from [`hc_kalman_check`] and not be used again.
 */
void hc_kalman_free(struct HcKalman *k);

/**
 * Runs the tree analysis in both regimes; with `verify` the numerical
 * checks follow, seeded by `seed`.
 *
 * # Safety
 * `sys` must be a live system handle; `out` must be writable.
 */
enum HcStatus hc_analyze(const struct HcSystem *sys,
                         bool verify,
                         uint64_t seed,
                         struct HcReport **out);

/**
 * Verdict of a report; `HC_VERDICT_FAILED` for null.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
enum HcVerdict hc_report_verdict(const struct HcReport *r);

/**
 * Certified high-frequency exponent α̃, or −1 for null.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
int32_t hc_report_alpha(const struct HcReport *r);

/**
 * Certified low-frequency exponent β̃, or −1 for null.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
int32_t hc_report_beta(const struct HcReport *r);

/**
 * Serializes a report as JSON into a new string.
 *
 * # Safety
 * `r` must be a live handle; `out` must be writable. The string is
 * released with [`hc_string_free`].
 */
enum HcStatus hc_report_to_json(const struct HcReport *r, char **out);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `r` must come from [`hc_analyze`] and not be used again.
 */
void hc_report_free(struct HcReport *r);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used again.
 */
void hc_string_free(char *s);

/**
 * Smallest real part of the spectrum of `iξA + Bᵃ + Bˢ`.
 *
 * # Safety
 * `sys` must be a live system handle; `out` must be writable.
 */
enum HcStatus hc_spectral_rate(const struct HcSystem *sys, double xi, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPOCERT_H */
