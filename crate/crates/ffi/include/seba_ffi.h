#ifndef SEBA_FFI_H
#define SEBA_FFI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Transverse boundary condition.
typedef enum SebaBoundary {
  SEBA_BOUNDARY_DIRICHLET = 0,
  SEBA_BOUNDARY_NEUMANN = 1,
  SEBA_BOUNDARY_PERIODIC = 2,
  // Uses the `theta` argument.
  SEBA_BOUNDARY_FLOQUET = 3,
} SebaBoundary;

// Result codes.
typedef enum SebaStatus {
  SEBA_STATUS_OK = 0,
  SEBA_STATUS_NULL_POINTER = 1,
  SEBA_STATUS_INVALID_PARAMETER = 2,
  SEBA_STATUS_POLE_PROXIMITY = 3,
  SEBA_STATUS_TRUNCATION = 4,
  SEBA_STATUS_NO_CONVERGENCE = 5,
  SEBA_STATUS_LEVEL_OUT_OF_RANGE = 6,
  SEBA_STATUS_DEGENERATE = 7,
  SEBA_STATUS_BUFFER_TOO_SMALL = 8,
  SEBA_STATUS_INTERNAL = 9,
} SebaStatus;

// Opaque problem handle: geometry, boundary condition and series settings.
typedef struct SebaProblem SebaProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a problem on the unit-area rectangle of eccentricity `e` with the
// scatterer at `(x0_frac·a, y0_frac·b)`. `bc` is a [`SebaBoundary`] value;
// `tail_tol <= 0` selects the default.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum SebaStatus seba_problem_new(double e,
                                 double x0_frac,
                                 double y0_frac,
                                 uint32_t bc,
                                 double theta,
                                 double tail_tol,
                                 struct SebaProblem **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `p` must be null or come from [`seba_problem_new`] and not be freed twice.
void seba_problem_free(struct SebaProblem *p);

// `F(z)` and `F'(z)`. Either output may be null.
//
// # Safety
// `p` must be a live handle; non-null outputs must be writable.
enum SebaStatus seba_eval_f(const struct SebaProblem *p,
                            double z,
                            double *value,
                            double *derivative);

// The coupling `α_n` and the eigenvalue it produces.
//
// # Safety
// `p` must be a live handle; non-null outputs must be writable.
enum SebaStatus seba_alpha_n(const struct SebaProblem *p,
                             size_t n,
                             double *alpha,
                             double *z_target);

// Eigenvalues in `[lo, hi]` for coupling `alpha`, ascending and repeated by
// multiplicity. `*len` receives the total count; when it exceeds `cap` the
// call returns `BufferTooSmall` and writes the first `cap` values.
//
// # Safety
// `p` must be a live handle, `buf` must hold `cap` doubles (or be null when
// `cap` is 0) and `len` must be writable.
enum SebaStatus seba_eigenvalues(const struct SebaProblem *p,
                                 double alpha,
                                 double lo,
                                 double hi,
                                 double *buf,
                                 size_t cap,
                                 size_t *len);

// Localization error `ε` at level `n`, its theoretical bound and the eigenvalue.
//
// # Safety
// `p` must be a live handle; non-null outputs must be writable.
enum SebaStatus seba_epsilon(const struct SebaProblem *p,
                             size_t n,
                             double *eps,
                             double *bound,
                             double *z);

// Left side of the secular equation of `-d² - cδ(x - x0)` on `[0, a]`.
//
// # Safety
// `out` must be writable.
enum SebaStatus seba_secular_lhs(double a, double x0, double z, double *out);

// Copies the calling thread's last error message into `buf` (NUL-terminated,
// truncated to `cap`) and returns the length the full message needs,
// including the terminator.
//
// # Safety
// `buf` must hold `cap` bytes, or be null when `cap` is 0.
size_t seba_last_error_message(char *buf, size_t cap);

// Library version as a static NUL-terminated string.
const char *seba_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEBA_FFI_H */
