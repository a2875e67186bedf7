#ifndef SQRNG_H
#define SQRNG_H

/* Generated from the sqrng-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SqrngStatus {
  SQRNG_STATUS_OK = 0,
  SQRNG_STATUS_NULL_POINTER = 1,
  SQRNG_STATUS_INVALID_ARGUMENT = 2,
  SQRNG_STATUS_INCONSISTENT_STATISTICS = 3,
  SQRNG_STATUS_MISSING_STATISTICS = 4,
  SQRNG_STATUS_BUFFER_TOO_SMALL = 5,
  SQRNG_STATUS_PANIC = 6,
} SqrngStatus;

/**
 * A multi-round server attack.
 */
typedef struct SqrngAttack SqrngAttack;

/**
 * Output of the extraction step.
 */
typedef struct SqrngExtraction SqrngExtraction;

/**
 * Observed protocol statistics.
 */
typedef struct SqrngStats SqrngStats;

/**
 * A finished protocol run.
 */
typedef struct SqrngTranscript SqrngTranscript;

/**
 * Plain-struct mirror of the rate report. Lambda entries are NaN for
 * messages with zero mass.
 */
typedef struct SqrngRateReport {
  double lambda_plus;
  double lambda_minus;
  double overlap2re_plus;
  double overlap2re_minus;
  double term_plus;
  double term_minus;
  double bound;
  bool abort;
} SqrngRateReport;

/**
 * Outcome of one reduction check.
 */
typedef struct SqrngReductionReport {
  double accept_probability;
  double expected_accept;
  double state_fidelity;
  bool passed;
} SqrngReductionReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; never freed by the caller.
 */
const char *sqrng_version(void);

/**
 * Message for the calling thread's most recent failure, or NULL.
 * Valid until the next failing call on the same thread.
 */
const char *sqrng_last_error(void);

/**
 * Frees a string returned by a `*_to_json` function.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void sqrng_string_free(char *s);

/**
 * Binary entropy of `p` in bits, written to `out`.
 *
 * # Safety
 * `out` must be valid for one f64 write.
 */
enum SqrngStatus sqrng_binary_entropy(double p, double *out);

/**
 * Secure rate of a depolarizing channel with flip rate `q_fr`.
 *
 * # Safety
 * `out` must be valid for one f64 write.
 */
enum SqrngStatus sqrng_closed_form_rate(double q_fr, double *out);

/**
 * Reflected-round flip rate for depolarizing parameter `q` under mode
 * 0 (dependent, Q_FR = Q) or 1 (independent, Q_FR = 2Q(1-Q)).
 *
 * # Safety
 * `out` must be valid for one f64 write.
 */
enum SqrngStatus sqrng_channel_qfr(double q, int mode, double *out);

/**
 * Builds statistics from raw probabilities. `p_ac` is row-major over
 * (returned bit a, message c): [P(0,+), P(0,-), P(1,+), P(1,-)].
 *
 * # Safety
 * `p_ac` must point to 4 f64 values; `out` receives an owned handle.
 */
enum SqrngStatus sqrng_stats_new(const double *p_ac,
                                 double p_plus_acc,
                                 double p_minus_acc,
                                 double slack,
                                 struct SqrngStats **out);

/**
 * Exact statistics of an honest run over a depolarizing channel.
 *
 * # Safety
 * `out` receives an owned handle.
 */
enum SqrngStatus sqrng_stats_from_depolarization(double q, int mode, struct SqrngStats **out);

/**
 * # Safety
 * `stats` must come from this library and not be freed twice.
 */
void sqrng_stats_free(struct SqrngStats *stats);

/**
 * Computes the secure-rate bound from statistics into `report`.
 *
 * # Safety
 * `stats` must be a live handle; `report` valid for one struct write.
 */
enum SqrngStatus sqrng_entropy_bound(const struct SqrngStats *stats,
                                     struct SqrngRateReport *report);

/**
 * Runs the protocol. Mode is 0 (dependent) or 1 (independent);
 * `keep_rounds` stores per-round records in the transcript.
 *
 * # Safety
 * `out` receives an owned handle.
 */
enum SqrngStatus sqrng_simulate(size_t rounds,
                                size_t tests,
                                double q,
                                int mode,
                                uint64_t seed,
                                bool keep_rounds,
                                struct SqrngTranscript **out);

/**
 * Parses a transcript from its JSON interchange form.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` receives an owned
 * handle.
 */
enum SqrngStatus sqrng_transcript_from_json(const char *text, struct SqrngTranscript **out);

/**
 * Serializes a transcript to JSON; free the string with
 * `sqrng_string_free`.
 *
 * # Safety
 * `transcript` must be a live handle; `out` receives an owned string.
 */
enum SqrngStatus sqrng_transcript_to_json(const struct SqrngTranscript *transcript, char **out);

/**
 * Number of raw bits in the transcript; 0 for NULL.
 *
 * # Safety
 * `transcript` must be NULL or a live handle.
 */
size_t sqrng_transcript_raw_len(const struct SqrngTranscript *transcript);

/**
 * Copies the raw bits, packed MSB-first, into `out`.
 *
 * # Safety
 * `transcript` must be a live handle; `out` must hold `capacity`
 * writable bytes.
 */
enum SqrngStatus sqrng_transcript_raw_bytes(const struct SqrngTranscript *transcript,
                                            uint8_t *out,
                                            size_t capacity);

/**
 * Copies the transcript's statistics into a fresh handle; fails with
 * `MissingStatistics` when a round kind had zero samples.
 *
 * # Safety
 * `transcript` must be a live handle; `out` receives an owned handle.
 */
enum SqrngStatus sqrng_transcript_stats(const struct SqrngTranscript *transcript,
                                        struct SqrngStats **out);

/**
 * Entropy consumed by the schedule choice, in bits; NaN for NULL.
 *
 * # Safety
 * `transcript` must be NULL or a live handle.
 */
double sqrng_transcript_seed_cost_bits(const struct SqrngTranscript *transcript);

/**
 * # Safety
 * `transcript` must come from this library and not be freed twice.
 */
void sqrng_transcript_free(struct SqrngTranscript *transcript);

/**
 * Runs length selection and hashing on a transcript. A negative
 * `threshold_qfr` disables the noise threshold; the hash seed is
 * derived from `seed`. Aborts are reported through the handle, not the
 * status code.
 *
 * # Safety
 * `transcript` must be a live handle; `out` receives an owned handle.
 */
enum SqrngStatus sqrng_extract(const struct SqrngTranscript *transcript,
                               double margin,
                               double threshold_qfr,
                               uint64_t seed,
                               struct SqrngExtraction **out);

/**
 * Extracted bit count; 0 for NULL or aborted extraction.
 *
 * # Safety
 * `extraction` must be NULL or a live handle.
 */
size_t sqrng_extraction_ell(const struct SqrngExtraction *extraction);

/**
 * Rate used for length selection; NaN for NULL.
 *
 * # Safety
 * `extraction` must be NULL or a live handle.
 */
double sqrng_extraction_rate_used(const struct SqrngExtraction *extraction);

/**
 * Abort reason as a static string (`noise-too-high`,
 * `inconsistent-statistics`, `insufficient-test-rounds`), or NULL when
 * the extraction produced output.
 *
 * # Safety
 * `extraction` must be NULL or a live handle.
 */
const char *sqrng_extraction_abort_reason(const struct SqrngExtraction *extraction);

/**
 * Copies the extracted bits, packed MSB-first, into `out`.
 *
 * # Safety
 * `extraction` must be a live handle; `out` must hold `capacity`
 * writable bytes.
 */
enum SqrngStatus sqrng_extraction_output_bytes(const struct SqrngExtraction *extraction,
                                               uint8_t *out,
                                               size_t capacity);

/**
 * Length in bits of the hash seed that was used; 0 when aborted.
 *
 * # Safety
 * `extraction` must be NULL or a live handle.
 */
size_t sqrng_extraction_hash_seed_len(const struct SqrngExtraction *extraction);

/**
 * Copies the hash seed bits, packed MSB-first, into `out`.
 *
 * # Safety
 * `extraction` must be a live handle; `out` must hold `capacity`
 * writable bytes.
 */
enum SqrngStatus sqrng_extraction_hash_seed_bytes(const struct SqrngExtraction *extraction,
                                                  uint8_t *out,
                                                  size_t capacity);

/**
 * # Safety
 * `extraction` must come from this library and not be freed twice.
 */
void sqrng_extraction_free(struct SqrngExtraction *extraction);

/**
 * Toeplitz-hashes `raw_bits` input bits down to `ell` output bits. The
 * seed must hold exactly `raw_bits + ell - 1` bits; all buffers are
 * packed MSB-first.
 *
 * # Safety
 * `raw` and `seed` must hold enough bytes for their bit counts; `out`
 * must hold `out_capacity` writable bytes.
 */
enum SqrngStatus sqrng_toeplitz_hash(const uint8_t *raw,
                                     size_t raw_bits,
                                     const uint8_t *seed,
                                     size_t seed_bits,
                                     size_t ell,
                                     uint8_t *out,
                                     size_t out_capacity);

/**
 * Samples an isometry-valid attack on `rounds` rounds with output
 * ancilla dimension `d_out`, deterministically from `seed`.
 *
 * # Safety
 * `out` receives an owned handle.
 */
enum SqrngStatus sqrng_attack_sample(size_t rounds,
                                     size_t d_out,
                                     uint64_t seed,
                                     struct SqrngAttack **out);

/**
 * Parses an attack from its JSON interchange form.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` receives an owned
 * handle.
 */
enum SqrngStatus sqrng_attack_from_json(const char *text, struct SqrngAttack **out);

/**
 * Serializes an attack to JSON; free the string with
 * `sqrng_string_free`.
 *
 * # Safety
 * `attack` must be a live handle; `out` receives an owned string.
 */
enum SqrngStatus sqrng_attack_to_json(const struct SqrngAttack *attack, char **out);

/**
 * # Safety
 * `attack` must come from this library and not be freed twice.
 */
void sqrng_attack_free(struct SqrngAttack *attack);

/**
 * Checks the acceptance reduction for one attack against a schedule
 * string like "0110" (1 = measure-resend, 0 = reflect).
 *
 * # Safety
 * `attack` must be a live handle; `theta` a NUL-terminated string;
 * `report` valid for one struct write.
 */
enum SqrngStatus sqrng_verify_reduction(const struct SqrngAttack *attack,
                                        const char *theta,
                                        double tol,
                                        struct SqrngReductionReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SQRNG_H */
