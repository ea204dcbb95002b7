/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef COMBADC_H
#define COMBADC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum CombadcStatus {
  COMBADC_STATUS_OK = 0,
  COMBADC_STATUS_NULL_POINTER = 1,
  COMBADC_STATUS_INVALID_UTF8 = 2,
  COMBADC_STATUS_PARSE_ERROR = 3,
  COMBADC_STATUS_VALIDATION_ERROR = 4,
  COMBADC_STATUS_INVALID_ARGUMENT = 5,
  COMBADC_STATUS_RUNTIME_ERROR = 6,
  COMBADC_STATUS_OUT_OF_RANGE = 7,
  COMBADC_STATUS_BUFFER_TOO_SMALL = 8,
  COMBADC_STATUS_PANIC = 9,
} CombadcStatus;

/**
 * Opaque scenario configuration.
 */
typedef struct CombadcScenario CombadcScenario;

/**
 * Opaque SCM run result.
 */
typedef struct CombadcScm CombadcScm;

/**
 * Opaque sine-sweep result.
 */
typedef struct CombadcSweep CombadcSweep;

/**
 * One sweep row. `ok == 0` means the point failed and the metrics are NaN.
 */
typedef struct CombadcSweepPoint {
  double freq_hz;
  uint32_t subband;
  uint8_t ok;
  double sfdr_db;
  double sinad_db;
  double enob_bits;
} CombadcSweepPoint;

/**
 * One demodulated channel. `ok == 0` means demodulation failed.
 */
typedef struct CombadcChannel {
  uint32_t channel;
  uint8_t ok;
  double snr_db;
  double unequalized_snr_db;
} CombadcChannel;

/**
 * Sine-test metrics of a caller-supplied capture.
 */
typedef struct CombadcMetrics {
  double sfdr_db;
  double sinad_db;
  double enob_bits;
  double fundamental_hz;
} CombadcMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *combadc_version(void);

/**
 * Copy the calling thread's last error message.
 */
enum CombadcStatus combadc_last_error(char *buf, uintptr_t cap, uintptr_t *needed);

/**
 * Scenario with every parameter at its default.
 */
enum CombadcStatus combadc_scenario_default(struct CombadcScenario **out);

/**
 * Parse and validate config text (`section.key = value` lines).
 */
enum CombadcStatus combadc_scenario_from_text(const char *text, struct CombadcScenario **out);

void combadc_scenario_free(struct CombadcScenario *h);

enum CombadcStatus combadc_scenario_set_seed(struct CombadcScenario *h, uint64_t seed);

/**
 * Canonical config text; loading it reproduces the scenario.
 */
enum CombadcStatus combadc_scenario_to_text(const struct CombadcScenario *h,
                                            char *buf,
                                            uintptr_t cap,
                                            uintptr_t *needed);

/**
 * Run the configured sine sweep on `jobs` threads (0 = all cores).
 */
enum CombadcStatus combadc_run_sweep(const struct CombadcScenario *h,
                                     uint32_t jobs,
                                     struct CombadcSweep **out);

uintptr_t combadc_sweep_len(const struct CombadcSweep *h);

enum CombadcStatus combadc_sweep_point(const struct CombadcSweep *h,
                                       uintptr_t index,
                                       struct CombadcSweepPoint *out);

/**
 * `freq_ghz,sfdr_db,sinad_db,enob_bits` CSV.
 */
enum CombadcStatus combadc_sweep_csv(const struct CombadcSweep *h,
                                     char *buf,
                                     uintptr_t cap,
                                     uintptr_t *needed);

void combadc_sweep_free(struct CombadcSweep *h);

/**
 * Run the SCM link. `channel == 0` demodulates every active channel;
 * otherwise only that one, and `mute_others != 0` transmits it alone.
 */
enum CombadcStatus combadc_run_scm(const struct CombadcScenario *h,
                                   uint32_t channel,
                                   uint8_t mute_others,
                                   uint32_t jobs,
                                   struct CombadcScm **out);

uintptr_t combadc_scm_len(const struct CombadcScm *h);

enum CombadcStatus combadc_scm_channel(const struct CombadcScm *h,
                                       uintptr_t index,
                                       struct CombadcChannel *out);

/**
 * `channel,snr_db` CSV.
 */
enum CombadcStatus combadc_scm_csv(const struct CombadcScm *h,
                                   char *buf,
                                   uintptr_t cap,
                                   uintptr_t *needed);

void combadc_scm_free(struct CombadcScm *h);

/**
 * Sine test (default analysis: 1 GSa/s, 4 x 16384-point periodogram,
 * 10-500 MHz) of `len` samples at `rate` Hz.
 */
enum CombadcStatus combadc_sine_metrics(const double *samples,
                                        uintptr_t len,
                                        double rate,
                                        double expected_hz,
                                        struct CombadcMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMBADC_H */
