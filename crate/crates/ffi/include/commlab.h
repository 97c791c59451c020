#ifndef COMMLAB_H
#define COMMLAB_H

/* Generated by cbindgen from crates/ffi/src. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Which side of the transform a field lives on.
enum CommlabSide
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  COMMLAB_SIDE_SPATIAL = 0,
  COMMLAB_SIDE_FREQUENCY = 1,
};
#ifndef __cplusplus
typedef int32_t CommlabSide;
#endif // __cplusplus

// Result codes returned by every fallible call.
enum CommlabStatus
#ifdef __cplusplus
  : int32_t
#endif // __cplusplus
 {
  COMMLAB_STATUS_OK = 0,
  COMMLAB_STATUS_NULL_POINTER = 1,
  // Bad input: grid shape, symbol expression, dimensions, guards.
  COMMLAB_STATUS_INVALID_ARGUMENT = 2,
  // Quadrature, SVD or power-iteration failure.
  COMMLAB_STATUS_NUMERICAL = 3,
  COMMLAB_STATUS_IO = 4,
  // A Rust panic was caught at the boundary.
  COMMLAB_STATUS_PANIC = 5,
};
#ifndef __cplusplus
typedef int32_t CommlabStatus;
#endif // __cplusplus

// Complex samples on a grid.
typedef struct CommlabField CommlabField;

// Periodic lattice `[-L, L)^d` with `N` points per axis.
typedef struct CommlabGrid CommlabGrid;

// A linear operator on fields over one grid.
typedef struct CommlabOperator CommlabOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null if none.
// The pointer stays valid until the next failing call on the same thread.
const char *commlab_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *commlab_version(void);

// # Safety
// `out` must be a valid pointer to writable storage for one pointer.
CommlabStatus commlab_grid_new(uintptr_t d, uintptr_t n, double l, struct CommlabGrid **out);

// # Safety
// `grid` must be null or a pointer from `commlab_grid_new` not yet freed.
void commlab_grid_free(struct CommlabGrid *grid);

// Number of lattice points `N^d`, or 0 for a null grid.
//
// # Safety
// `grid` must be null or a live grid handle.
uintptr_t commlab_grid_len(const struct CommlabGrid *grid);

// Build a field from `len` real and imaginary parts in lattice order (last axis fastest).
// `im` may be null for a real field.
//
// # Safety
// `re` (and `im` when non-null) must point to `len` readable doubles.
CommlabStatus commlab_field_new(const struct CommlabGrid *grid,
                                CommlabSide side,
                                const double *re,
                                const double *im,
                                uintptr_t len,
                                struct CommlabField **out);

// # Safety
// `field` must be null or a live field handle.
void commlab_field_free(struct CommlabField *field);

// Copy the samples out; `len` must equal the grid size. `im` may be null.
//
// # Safety
// `re` (and `im` when non-null) must point to `len` writable doubles.
CommlabStatus commlab_field_read(const struct CommlabField *field,
                                 double *re,
                                 double *im,
                                 uintptr_t len);

// Forward transform of a spatial field.
//
// # Safety
// `field` must be a live field handle and `out` writable.
CommlabStatus commlab_forward_ft(const struct CommlabField *field, struct CommlabField **out);

// Inverse transform of a frequency field.
//
// # Safety
// `field` must be a live field handle and `out` writable.
CommlabStatus commlab_inverse_ft(const struct CommlabField *field, struct CommlabField **out);

// Multiplier with the symbol named by `symbol` (same sub-language as the CLI configs).
// With `sphere` set the symbol is evaluated at `xi / |xi|`.
//
// # Safety
// `grid` must be a live grid handle, `symbol` a NUL-terminated string, `out` writable.
CommlabStatus commlab_operator_multiplier(const struct CommlabGrid *grid,
                                          const char *symbol,
                                          bool sphere,
                                          struct CommlabOperator **out);

// Commutator of the multiplier for `symbol` with multiplication by the spatial field `b`.
//
// # Safety
// `b` must be a live field handle, `symbol` a NUL-terminated string, `out` writable.
CommlabStatus commlab_operator_commutator(const char *symbol,
                                          bool sphere,
                                          const struct CommlabField *b,
                                          struct CommlabOperator **out);

// # Safety
// `op` must be null or a live operator handle.
void commlab_operator_free(struct CommlabOperator *op);

// Apply the operator, or its adjoint when `adjoint` is set, to a spatial field.
//
// # Safety
// `op` and `u` must be live handles and `out` writable.
CommlabStatus commlab_operator_apply(const struct CommlabOperator *op,
                                     const struct CommlabField *u,
                                     bool adjoint,
                                     struct CommlabField **out);

// L2 operator norm by power iteration with at most `iterations` steps.
// Fails with `COMMLAB_STATUS_NUMERICAL` if the iteration does not converge.
//
// # Safety
// `op` must be a live operator handle and `out` writable.
CommlabStatus commlab_operator_norm(const struct CommlabOperator *op,
                                    uintptr_t iterations,
                                    double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMMLAB_H */
