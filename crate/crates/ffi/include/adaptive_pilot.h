#ifndef ADAPTIVE_PILOT_H
#define ADAPTIVE_PILOT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum ApStatus {
  AP_STATUS_OK = 0,
  AP_STATUS_NULL_POINTER = 1,
  AP_STATUS_INVALID_ARGUMENT = 2,
  AP_STATUS_LENGTH_MISMATCH = 3,
  AP_STATUS_SINGULAR_ESTIMATE = 4,
  AP_STATUS_ZERO_ENERGY = 5,
  AP_STATUS_INDEX_OUT_OF_RANGE = 6,
  AP_STATUS_INTERNAL = 7,
  AP_STATUS_PANIC = 8,
} ApStatus;

// Opaque controller handle.
typedef struct ApController ApController;

// Link parameters. `modulation_order` is bits per symbol (2 or 4).
typedef struct ApLinkConfig {
  size_t num_subcarriers;
  size_t cp_length;
  double subcarrier_bandwidth;
  double symbol_time;
  uint32_t modulation_order;
  size_t base_pilot_period;
  size_t pilots_per_sounding;
  size_t pilot_subcarrier_spacing;
  double snr_db;
  double ber_threshold;
  size_t ber_window;
  size_t feedback_delay;
  uint64_t rng_seed;
} ApLinkConfig;

typedef struct ApComplex {
  double re;
  double im;
} ApComplex;

typedef struct ApRunMetrics {
  uint64_t total_bits;
  uint64_t bit_errors;
  double ber;
  double data_rate_fraction;
  uint64_t resets;
  double pattern_occupancy[4];
  uint64_t seed;
} ApRunMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the last failed call on this thread; empty after a
// successful call. Valid until the next call on the same thread.
const char *ap_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *ap_version(void);

struct ApLinkConfig ap_link_config_default(void);

// Lower correlation boundary of zero-based pattern `i`.
enum ApStatus ap_lower_boundary(size_t i, double *out_value);

// Upper correlation boundary of zero-based pattern `i`.
enum ApStatus ap_higher_boundary(size_t i, double *out_value);

// Normalized cross-correlation of two pilot observations of length `len`.
enum ApStatus ap_cross_correlation(const struct ApComplex *p1,
                                   const struct ApComplex *p2,
                                   size_t len,
                                   double *out_r);

// Pattern for correlation `r`. `boundary_set` is 1..=5, or 0 for the
// polynomial boundaries. Writes the one-based pattern number and its period.
enum ApStatus ap_select_pattern(double r,
                                uint32_t boundary_set,
                                size_t base_period,
                                uint32_t *out_pattern,
                                size_t *out_period);

// Creates a controller. `boundary_set` is 1..=5, or 0 for the polynomial
// boundaries.
enum ApStatus ap_controller_new(const struct ApLinkConfig *config,
                                uint32_t boundary_set,
                                struct ApController **out_handle);

// Releases a controller; null is ignored.
void ap_controller_free(struct ApController *handle);

// Feeds one sounding's received pilots. `out_r` receives the correlation
// with the previous sounding, or NaN for the first one after a reset.
enum ApStatus ap_controller_on_sounding(struct ApController *handle,
                                        const struct ApComplex *pilots,
                                        size_t len,
                                        double *out_r,
                                        uint32_t *out_pattern);

// Feeds the bit errors of one data symbol; `out_reset` is set when the
// controller fell back to pattern 1.
enum ApStatus ap_controller_on_data_symbol(struct ApController *handle,
                                           uint64_t bit_errors,
                                           uint64_t bits,
                                           bool *out_reset);

// Current one-based pattern, its period, and whether the next symbol should
// be a sounding.
enum ApStatus ap_controller_state(const struct ApController *handle,
                                  uint32_t *out_pattern,
                                  size_t *out_period,
                                  bool *out_sounding_due);

// Simulates one link on the default tap profile with correlation `rho`.
// `fixed_pattern` 1..=4 pins the pattern; 0 selects adaptive mode with
// `boundary_set` (1..=5, or 0 for the polynomial boundaries).
enum ApStatus ap_run_link(const struct ApLinkConfig *config,
                          double rho,
                          uint32_t fixed_pattern,
                          uint32_t boundary_set,
                          size_t num_symbols,
                          uint64_t seed,
                          struct ApRunMetrics *out_metrics);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADAPTIVE_PILOT_H */
