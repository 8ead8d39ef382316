#ifndef QOT_H
#define QOT_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum QotStatus {
  QOT_STATUS_OK = 0,
  QOT_STATUS_NULL_POINTER = 1,
  QOT_STATUS_INVALID_ARGUMENT = 2,
  QOT_STATUS_CAPACITY = 3,
  QOT_STATUS_MODEL_VIOLATION = 4,
  QOT_STATUS_INTEGRITY = 5,
  QOT_STATUS_DECODE = 6,
  QOT_STATUS_PROTOCOL_ABORT = 7,
  QOT_STATUS_AUDIT_FAILED = 8,
  QOT_STATUS_BUFFER_TOO_SMALL = 9,
  QOT_STATUS_IO = 10,
  QOT_STATUS_PANIC = 11,
} QotStatus;

/**
 * OT protocol variant.
 */
typedef enum QotVariant {
  QOT_VARIANT_NQSM2_MSG = 0,
  QOT_VARIANT_BQSM2_MSG = 1,
  QOT_VARIANT_ONESHOT_TLP = 2,
} QotVariant;

/**
 * OT backend for [`qot_2pc_run`].
 */
typedef enum QotBackend {
  QOT_BACKEND_IDEAL = 0,
  QOT_BACKEND_QUANTUM_SIM = 1,
} QotBackend;

/**
 * Opaque parsed Bristol-fashion circuit.
 */
typedef struct QotCircuit QotCircuit;

/**
 * Opaque time-lock puzzle.
 */
typedef struct QotPuzzle QotPuzzle;

/**
 * Opaque protocol transcript.
 */
typedef struct QotTranscript QotTranscript;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string. Do not free.
 */
const char *qot_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The caller
 * frees the result with [`qot_string_free`].
 */
char *qot_last_error_message(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void qot_string_free(char *s);

/**
 * The full-pair guessing bound `1/2 + 1/N`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QotStatus qot_guess_bound(size_t n, double *out);

/**
 * Runs one honest OT. Writes the receiver's bit to `out_bit` and, when
 * `out_transcript` is not NULL, a transcript handle.
 *
 * # Safety
 * `out_bit` must be valid for writes; `out_transcript` must be NULL or
 * valid for writes.
 */
enum QotStatus qot_ot_run(enum QotVariant variant,
                          size_t n,
                          bool x0,
                          bool x1,
                          bool y,
                          uint64_t seed,
                          bool *out_bit,
                          struct QotTranscript **out_transcript);

/**
 * The transcript as `tick,party,event,digest` lines. Caller frees.
 *
 * # Safety
 * `t` must be a live transcript handle; `out` must be valid for writes.
 */
enum QotStatus qot_transcript_log(const struct QotTranscript *t, char **out);

/**
 * # Safety
 * `t` must be NULL or a live transcript handle.
 */
void qot_transcript_free(struct QotTranscript *t);

/**
 * Parses Bristol-fashion circuit text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum QotStatus qot_circuit_parse(const char *text, struct QotCircuit **out);

/**
 * Input widths of parties 1 and 2 and the output width.
 *
 * # Safety
 * `c` must be a live circuit handle; the out pointers must be valid for
 * writes.
 */
enum QotStatus qot_circuit_widths(const struct QotCircuit *c,
                                  size_t *out_garbler,
                                  size_t *out_evaluator,
                                  size_t *out_outputs);

/**
 * # Safety
 * `c` must be NULL or a live circuit handle.
 */
void qot_circuit_free(struct QotCircuit *c);

/**
 * One-shot 2PC: party 1 garbles, party 2 evaluates. The quantum backend
 * uses `N = 4` registers. Writes the output bits and whether the
 * single-message audit passed. `out_bits_len` must be at least the
 * circuit's output width.
 *
 * # Safety
 * `c` must be a live circuit handle; input arrays must hold the stated
 * number of bytes; the out pointers must be valid for writes.
 */
enum QotStatus qot_2pc_run(const struct QotCircuit *c,
                           const uint8_t *garbler_bits,
                           size_t garbler_len,
                           const uint8_t *evaluator_bits,
                           size_t evaluator_len,
                           enum QotBackend backend,
                           size_t label_bits,
                           uint64_t seed,
                           uint8_t *out_bits,
                           size_t out_bits_len,
                           bool *out_audit_pass);

/**
 * Seals `(k, l)` with fresh randomness derived from `seed` behind a
 * `tau`-step hash chain.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QotStatus qot_puzzle_gen(uint64_t tau,
                              uint32_t k,
                              uint32_t l,
                              uint32_t lambda,
                              uint64_t seed,
                              struct QotPuzzle **out);

/**
 * Solves a puzzle sequentially, reporting the chain hashes spent.
 *
 * # Safety
 * `z` must be a live puzzle handle; the out pointers must be valid for
 * writes (`out_hashes` may be NULL).
 */
enum QotStatus qot_puzzle_solve(const struct QotPuzzle *z,
                                uint32_t lambda,
                                uint32_t *out_k,
                                uint32_t *out_l,
                                uint64_t *out_hashes);

/**
 * # Safety
 * `z` must be NULL or a live puzzle handle.
 */
void qot_puzzle_free(struct QotPuzzle *z);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QOT_H */
