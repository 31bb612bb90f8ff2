#ifndef HEIGHTLAB_H
#define HEIGHTLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define HL_MODEL_HOM 0

#define HL_MODEL_LIP 1

typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_NULL_POINTER = 1,
  HL_STATUS_INVALID_ARGUMENT = 2,
  HL_STATUS_INFEASIBLE = 3,
  HL_STATUS_BUDGET_EXCEEDED = 4,
  HL_STATUS_NOT_SUPPORTED = 5,
  HL_STATUS_INTERNAL = 6,
  HL_STATUS_PANIC = 7,
} HlStatus;

typedef struct HlBc HlBc;

typedef struct HlFunction HlFunction;

typedef struct HlTorus HlTorus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length plus one.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t hl_last_error_message(char *buf, size_t len);

/**
 * Builds a torus from `len` side lengths.
 *
 * # Safety
 * `dims` must point to `len` values; `out` must be writable.
 */
enum HlStatus hl_torus_new(const size_t *dims, size_t len, struct HlTorus **out);

/**
 * # Safety
 * `torus` must be null or a handle from `hl_torus_new` not yet freed.
 */
void hl_torus_free(struct HlTorus *torus);

/**
 * Number of vertices; 0 for a null handle.
 *
 * # Safety
 * `torus` must be null or a live handle.
 */
size_t hl_torus_vertex_count(const struct HlTorus *torus);

/**
 * One-point boundary condition f(v) = 0.
 *
 * # Safety
 * `torus` must be a live handle; `out` must be writable.
 */
enum HlStatus hl_bc_one_point(const struct HlTorus *torus, size_t vertex, struct HlBc **out);

/**
 * Zero boundary condition.
 *
 * # Safety
 * `torus` must be a live handle; `out` must be writable.
 */
enum HlStatus hl_bc_zero(const struct HlTorus *torus, struct HlBc **out);

/**
 * # Safety
 * `bc` must be null or a live handle.
 */
void hl_bc_free(struct HlBc *bc);

/**
 * Exact number of functions, by enumeration. Fails with
 * `BudgetExceeded` past the node budget or when the count exceeds 2^64 - 1.
 *
 * # Safety
 * `bc` must be a live handle; `out` must be writable.
 */
enum HlStatus hl_count(const struct HlBc *bc, uint32_t model, uint64_t *out);

/**
 * Exact uniform sample by coupling from the past.
 *
 * # Safety
 * `bc` must be a live handle; `out` must be writable.
 */
enum HlStatus hl_sample(const struct HlBc *bc,
                        uint32_t model,
                        uint64_t seed,
                        struct HlFunction **out);

/**
 * # Safety
 * `f` must be null or a live handle.
 */
void hl_function_free(struct HlFunction *f);

/**
 * Number of values; 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t hl_function_len(const struct HlFunction *f);

/**
 * Copies the values into `buf`, which must hold `hl_function_len(f)` entries.
 *
 * # Safety
 * `f` must be a live handle; `buf` must point to `len` writable values.
 */
enum HlStatus hl_function_values(const struct HlFunction *f, int64_t *buf, size_t len);

/**
 * Number of distinct values.
 *
 * # Safety
 * `f` must be a live handle; `out` must be writable.
 */
enum HlStatus hl_function_range(const struct HlFunction *f, size_t *out);

/**
 * Number of edges of the level set around `x`; 0 when it is empty.
 *
 * # Safety
 * `f` and `bc` must be live handles; `out` must be writable.
 */
enum HlStatus hl_level_set_length(const struct HlFunction *f,
                                  const struct HlBc *bc,
                                  size_t x,
                                  size_t *out);

/**
 * Number of walls on a linear torus with the one-point condition at 0.
 *
 * # Safety
 * `f` and `bc` must be live handles; `out` must be writable.
 */
enum HlStatus hl_wall_count(const struct HlFunction *f, const struct HlBc *bc, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HEIGHTLAB_H */
