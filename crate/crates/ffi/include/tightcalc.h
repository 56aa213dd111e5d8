#ifndef TIGHTCALC_H
#define TIGHTCALC_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TcStatus {
  TC_STATUS_OK = 0,
  TC_STATUS_NULL_POINTER = 1,
  TC_STATUS_INVALID_UTF8 = 2,
  TC_STATUS_PARSE_ERROR = 3,
  TC_STATUS_FUEL_EXHAUSTED = 4,
  TC_STATUS_CHECK_FAILED = 5,
  TC_STATUS_UNTYPABLE = 6,
  TC_STATUS_BLOCKED = 7,
  TC_STATUS_MISMATCH = 8,
  TC_STATUS_INTERNAL = 9,
} TcStatus;

typedef enum TcCalculus {
  /**
   * Weak open call-by-value, typed by system V.
   */
  TC_CALCULUS_CBV = 0,
  /**
   * Call-by-value with global state, typed by system GS.
   */
  TC_CALCULUS_GS = 1,
} TcCalculus;

/**
 * A parsed term together with its state (empty for CBV).
 */
typedef struct TcConfig TcConfig;

/**
 * A type derivation and the system it belongs to.
 */
typedef struct TcDerivation TcDerivation;

/**
 * Step counts of an evaluation; `memory_steps` is zero for CBV.
 */
typedef struct TcEvalResult {
  uint64_t beta_steps;
  uint64_t memory_steps;
  uint64_t normal_size;
  bool blocked;
} TcEvalResult;

/**
 * Counters of a derivation. In system V `m` is always 0 and `d` is the
 * size counter.
 */
typedef struct TcCounters {
  uint64_t b;
  uint64_t m;
  uint64_t d;
} TcCounters;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *tc_last_error(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must be null or a pointer obtained from this library that has not
 * been freed yet.
 */
void tc_string_free(char *s);

/**
 * Parses a term or a `(term | state)` configuration.
 *
 * # Safety
 * `src` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TcStatus tc_config_parse(const char *src, enum TcCalculus calculus, struct TcConfig **out);

/**
 * # Safety
 * `c` must be null or a handle from [`tc_config_parse`] not yet freed.
 */
void tc_config_free(struct TcConfig *c);

/**
 * Surface syntax of a configuration; free with [`tc_string_free`].
 *
 * # Safety
 * `c` must be a live handle or null.
 */
char *tc_config_to_string(const struct TcConfig *c);

/**
 * Evaluates with at most `fuel` steps.
 *
 * # Safety
 * `c` must be a live handle and `out` a valid pointer.
 */
enum TcStatus tc_eval(const struct TcConfig *c, uint64_t fuel, struct TcEvalResult *out);

/**
 * Synthesizes a tight derivation for the configuration in the system of its
 * calculus.
 *
 * # Safety
 * `c` must be a live handle and `out` a valid pointer.
 */
enum TcStatus tc_synthesize(const struct TcConfig *c, uint64_t fuel, struct TcDerivation **out);

/**
 * Reads a derivation from its JSON form. The system is inferred from the
 * arity of the counters.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum TcStatus tc_derivation_from_json(const char *json, struct TcDerivation **out);

/**
 * JSON form of a derivation; free with [`tc_string_free`].
 *
 * # Safety
 * `d` must be a live handle or null.
 */
char *tc_derivation_to_json(const struct TcDerivation *d);

/**
 * # Safety
 * `d` must be null or a derivation handle not yet freed.
 */
void tc_derivation_free(struct TcDerivation *d);

/**
 * Counters at the root of the derivation.
 *
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum TcStatus tc_derivation_counters(const struct TcDerivation *d, struct TcCounters *out);

/**
 * Checks every rule instance. On failure the error message names the path
 * of the offending node.
 *
 * # Safety
 * `d` must be a live handle.
 */
enum TcStatus tc_derivation_check(const struct TcDerivation *d);

/**
 * Checks the derivation, evaluates its subject and compares the counters.
 * Returns [`TcStatus::Mismatch`] when they differ.
 *
 * # Safety
 * `d` must be a live handle.
 */
enum TcStatus tc_derivation_verify(const struct TcDerivation *d, uint64_t fuel);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TIGHTCALC_H */
