#ifndef SIMDIAG_H
#define SIMDIAG_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SimdiagStatus {
  SIMDIAG_STATUS_OK = 0,
  SIMDIAG_STATUS_NULL_POINTER = 1,
  SIMDIAG_STATUS_INVALID_ARGUMENT = 2,
  SIMDIAG_STATUS_PARSE = 3,
  SIMDIAG_STATUS_IO = 4,
  SIMDIAG_STATUS_TOO_MANY_QUBITS = 5,
  SIMDIAG_STATUS_NOT_DIAGONALIZED = 6,
  SIMDIAG_STATUS_INVARIANT = 7,
  SIMDIAG_STATUS_PANIC = 8,
} SimdiagStatus;

/**
 * Opaque partitioned and diagonalized Hamiltonian.
 */
typedef struct SimdiagGrouped SimdiagGrouped;

/**
 * Opaque Pauli Hamiltonian.
 */
typedef struct SimdiagHamiltonian SimdiagHamiltonian;

/**
 * Opaque state vector.
 */
typedef struct SimdiagState SimdiagState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL after a
 * successful one. Valid until the next `simdiag_*` call on the thread.
 */
const char *simdiag_last_error(void);

/**
 * Static NUL-terminated version string.
 */
const char *simdiag_version(void);

/**
 * Parses the text format: one `<coeff> <pauli>` pair per line.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SimdiagStatus simdiag_hamiltonian_parse(const char *text, struct SimdiagHamiltonian **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum SimdiagStatus simdiag_hamiltonian_load(const char *path, struct SimdiagHamiltonian **out);

/**
 * # Safety
 * `out` must be a writable pointer.
 */
enum SimdiagStatus simdiag_hamiltonian_tfim(size_t n_qubits,
                                            uint64_t seed,
                                            struct SimdiagHamiltonian **out);

/**
 * # Safety
 * `out` must be a writable pointer.
 */
enum SimdiagStatus simdiag_hamiltonian_syk(size_t n_qubits,
                                           uint64_t seed,
                                           struct SimdiagHamiltonian **out);

/**
 * Qubit count, or 0 for a NULL handle.
 *
 * # Safety
 * `h` must be NULL or a live handle.
 */
size_t simdiag_hamiltonian_n_qubits(const struct SimdiagHamiltonian *h);

/**
 * Term count, or 0 for a NULL handle.
 *
 * # Safety
 * `h` must be NULL or a live handle.
 */
size_t simdiag_hamiltonian_n_terms(const struct SimdiagHamiltonian *h);

/**
 * # Safety
 * `h` must be NULL or a handle not freed before.
 */
void simdiag_hamiltonian_free(struct SimdiagHamiltonian *h);

/**
 * Partitions `h` into commuting groups and diagonalizes each one.
 *
 * # Safety
 * `h` must be a live handle and `out` a writable pointer.
 */
enum SimdiagStatus simdiag_grouped_build(const struct SimdiagHamiltonian *h,
                                         struct SimdiagGrouped **out);

/**
 * # Safety
 * `g` must be NULL or a live handle.
 */
size_t simdiag_grouped_n_groups(const struct SimdiagGrouped *g);

/**
 * `m / (n * n_g)`, or 0 for a NULL handle.
 *
 * # Safety
 * `g` must be NULL or a live handle.
 */
double simdiag_grouped_predicted_speedup(const struct SimdiagGrouped *g);

/**
 * # Safety
 * `g` must be NULL or a handle not freed before.
 */
void simdiag_grouped_free(struct SimdiagGrouped *g);

/**
 * `|0...0>`
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum SimdiagStatus simdiag_state_zero(size_t n_qubits, struct SimdiagState **out);

/**
 * Normalized random state, reproducible from `seed`.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum SimdiagStatus simdiag_state_random(size_t n_qubits, uint64_t seed, struct SimdiagState **out);

/**
 * Copies `len` interleaved doubles (`len / 2` amplitudes, a power of two).
 *
 * # Safety
 * `data` must point to `len` readable doubles and `out` be writable.
 */
enum SimdiagStatus simdiag_state_from_amplitudes(const double *data,
                                                 size_t len,
                                                 struct SimdiagState **out);

/**
 * Qubit count, or 0 for a NULL handle.
 *
 * # Safety
 * `s` must be NULL or a live handle.
 */
size_t simdiag_state_n_qubits(const struct SimdiagState *s);

/**
 * Copies the amplitudes into `data`, which must hold `2 * 2^n` doubles;
 * `len` is its capacity in doubles.
 *
 * # Safety
 * `s` must be a live handle and `data` point to `len` writable doubles.
 */
enum SimdiagStatus simdiag_state_amplitudes(const struct SimdiagState *s, double *data, size_t len);

/**
 * `|<a|b>|`
 *
 * # Safety
 * `a`, `b` must be live handles and `out` writable.
 */
enum SimdiagStatus simdiag_state_fidelity(const struct SimdiagState *a,
                                          const struct SimdiagState *b,
                                          double *out);

/**
 * # Safety
 * `s` must be NULL or a handle not freed before.
 */
void simdiag_state_free(struct SimdiagState *s);

/**
 * `n_steps` grouped Trotter steps of size `total_time / n_steps`.
 *
 * # Safety
 * `g` and `s` must be live handles.
 */
enum SimdiagStatus simdiag_evolve_grouped(const struct SimdiagGrouped *g,
                                          struct SimdiagState *s,
                                          double total_time,
                                          size_t n_steps);

/**
 * Per-term baseline; terms in input order, or grouped order when
 * `group_major` is true.
 *
 * # Safety
 * `h` and `s` must be live handles.
 */
enum SimdiagStatus simdiag_evolve_baseline(const struct SimdiagHamiltonian *h,
                                           struct SimdiagState *s,
                                           double total_time,
                                           size_t n_steps,
                                           bool group_major);

/**
 * `<s|H|s>`
 *
 * # Safety
 * `h`, `s` must be live handles and `out` writable.
 */
enum SimdiagStatus simdiag_expectation(const struct SimdiagHamiltonian *h,
                                       const struct SimdiagState *s,
                                       double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SIMDIAG_H */
