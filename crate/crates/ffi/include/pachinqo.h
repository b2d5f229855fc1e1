#ifndef PACHINQO_H
#define PACHINQO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define PQ_FLAG_VALIDATE 1

#define PQ_FLAG_SERIAL_MOVEMENT 2

/**
 * Status codes. The first three match the CLI exit codes.
 */
typedef enum PqStatus {
  PQ_STATUS_OK = 0,
  /**
   * Malformed QASM or parameter JSON.
   */
  PQ_STATUS_PARSE = 1,
  /**
   * Circuit does not fit the layout, or invalid geometry.
   */
  PQ_STATUS_CAPACITY = 2,
  /**
   * Schedule failed validation or equivalence.
   */
  PQ_STATUS_VALIDATION = 3,
  /**
   * Null pointer, bad UTF-8 or unknown technique/grid/scale name.
   */
  PQ_STATUS_INVALID_ARGUMENT = 4,
  /**
   * Internal failure.
   */
  PQ_STATUS_INTERNAL = 5,
} PqStatus;

/**
 * Opaque compilation result.
 */
typedef struct PqResult PqResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Compiles OpenQASM 2.0 text.
 *
 * `technique`, `grid`, `scale` and `params_json` may be null for the
 * defaults (pachinqo, large-square, the params file's scale or `default`,
 * built-in parameters). `flags` is a bitwise OR of `PQ_FLAG_*`. On success
 * `*out` receives a handle to free with [`pq_result_free`].
 *
 * # Safety
 * String arguments must be null or NUL-terminated; `out` must be writable.
 */
enum PqStatus pq_compile_qasm(const char *qasm,
                              const char *technique,
                              const char *grid,
                              const char *scale,
                              const char *params_json,
                              uint32_t flags,
                              struct PqResult **out);

/**
 * # Safety
 * `r` must be null or a handle from [`pq_compile_qasm`] not yet freed.
 */
void pq_result_free(struct PqResult *r);

/**
 * Total schedule duration in microseconds. Zero for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
double pq_result_runtime_us(const struct PqResult *r);

/**
 * Estimated success probability. Zero for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
double pq_result_esp(const struct PqResult *r);

/**
 * Distinct inserted SWAPs. Zero for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t pq_result_swap_count(const struct PqResult *r);

/**
 * Serial trap-change events, loading and readout included. Zero for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t pq_result_trap_change_count(const struct PqResult *r);

/**
 * Summed Manhattan displacement of all atoms, in micrometres. Zero for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
double pq_result_movement_um(const struct PqResult *r);

/**
 * Executed U3 gates, SWAP components included. Zero for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t pq_result_u3_count(const struct PqResult *r);

/**
 * Executed CZ gates, SWAP components included. Zero for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t pq_result_cz_count(const struct PqResult *r);

/**
 * Wall-clock compile time in milliseconds. Zero for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
double pq_result_compile_time_ms(const struct PqResult *r);

/**
 * Qubits in the compiled circuit. Zero for a null handle.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
size_t pq_result_num_qubits(const struct PqResult *r);

/**
 * Schedule JSON, valid until the handle is freed.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
const char *pq_result_schedule_json(const struct PqResult *r);

/**
 * Metrics report JSON, valid until the handle is freed.
 *
 * # Safety
 * `r` must be null or a live handle.
 */
const char *pq_result_report_json(const struct PqResult *r);

/**
 * Message for the last failure on this thread; empty if none. Valid until
 * the next failing call on the same thread.
 */
const char *pq_last_error_message(void);

/**
 * Library version, static.
 */
const char *pq_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PACHINQO_H */
