#ifndef CPLAB_H
#define CPLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CplabStatus {
  CPLAB_STATUS_OK = 0,
  CPLAB_STATUS_DOMAIN = 1,
  CPLAB_STATUS_NON_CONVERGENCE = 2,
  CPLAB_STATUS_OVERFLOW = 3,
  CPLAB_STATUS_GUARD = 4,
  CPLAB_STATUS_DIMENSION_MISMATCH = 5,
  CPLAB_STATUS_NOT_POSITIVE = 6,
  CPLAB_STATUS_INVALID_WINDOW = 7,
  CPLAB_STATUS_FORMAT = 8,
  CPLAB_STATUS_IO = 9,
  // A required pointer was null or a string was not UTF-8.
  CPLAB_STATUS_INVALID_ARGUMENT = 10,
  // The output buffer is too short; the needed length was written.
  CPLAB_STATUS_BUFFER_TOO_SMALL = 11,
  CPLAB_STATUS_PANIC = 12,
  // Any other engine error; see the message.
  CPLAB_STATUS_OTHER = 13,
} CplabStatus;

// Per-coincidence normalization of the intersection kernel.
typedef enum CplabKernelMode {
  CPLAB_KERNEL_MODE_ERDOS_TAYLOR = 0,
  CPLAB_KERNEL_MODE_CONTINUUM = 1,
  CPLAB_KERNEL_MODE_RENEWAL = 2,
  // Indicator of distance at most `epsilon`.
  CPLAB_KERNEL_MODE_EPSILON = 3,
} CplabKernelMode;

typedef struct CplabEnsemble CplabEnsemble;

typedef struct CplabFactor CplabFactor;

typedef struct CplabKernel CplabKernel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread, NUL-terminated and truncated to `cap`
// bytes. Returns the full message length without the terminator.
//
// # Safety
// `buf` must be null or point to `cap` writable bytes.
size_t cplab_last_error(char *buf, size_t cap);

// `j^θ(t)` with absolute tolerance `tol`. On `NON_CONVERGENCE` the outputs hold the best
// estimate.
//
// # Safety
// Output pointers must be valid; `abs_error` may be null.
enum CplabStatus cplab_j_theta(double theta,
                               double t,
                               double tol,
                               double *value,
                               double *abs_error);

// The `j`-fold time convolution of `j^θ` at `t`.
//
// # Safety
// Output pointers must be valid; `abs_error` may be null.
enum CplabStatus cplab_j_convolution_power(double theta,
                                           double t,
                                           uint32_t j,
                                           double tol,
                                           double *value,
                                           double *abs_error);

// Partial sum `Σ_{j ≤ J} a^{j−1} j^{θ,*j}(t)`; `terms` receives the number of terms used.
// An overflowing series returns `OVERFLOW` with the last finite partial sum.
//
// # Safety
// `value` must be valid; `terms` may be null.
enum CplabStatus cplab_j_resummed(double theta,
                                  double a,
                                  double t,
                                  uint32_t max_terms,
                                  double tol,
                                  double *value,
                                  uint32_t *terms);

// Two-particle kernel from `x = {x1, y1, x2, y2}` to `xp` at time `t`; with `centered`
// nonzero the heat product is subtracted.
//
// # Safety
// `x` and `xp` must point to four doubles; `value` must be valid.
enum CplabStatus cplab_semigroup2(double theta,
                                  double t,
                                  const double *x,
                                  const double *xp,
                                  double tol,
                                  int32_t centered,
                                  double *value);

// Reads a path CSV at lattice horizon `lattice_n`.
//
// # Safety
// `path` must be a NUL-terminated string; `ensemble` must be valid.
enum CplabStatus cplab_ensemble_read_csv(const char *path,
                                         uint64_t lattice_n,
                                         struct CplabEnsemble **ensemble);

// Reads the binary ensemble format.
//
// # Safety
// As [`cplab_ensemble_read_csv`].
enum CplabStatus cplab_ensemble_read_binary(const char *path, struct CplabEnsemble **ensemble);

// Writes the path CSV (`binary` zero) or the binary format.
//
// # Safety
// `ensemble` must be a live handle and `path` a NUL-terminated string.
enum CplabStatus cplab_ensemble_write(const struct CplabEnsemble *ensemble,
                                      const char *path,
                                      int32_t binary);

// `count` lazy walks on `(s, t]` at horizon `n`, all started at the origin.
//
// # Safety
// `ensemble` must be valid.
enum CplabStatus cplab_ensemble_sample_walks(size_t count,
                                             int64_t s,
                                             int64_t t,
                                             uint64_t n,
                                             uint64_t seed,
                                             struct CplabEnsemble **ensemble);

// Number of paths; 0 for a null handle.
//
// # Safety
// `ensemble` must be null or a live handle.
size_t cplab_ensemble_len(const struct CplabEnsemble *ensemble);

// Copies the path weights; see [`cplab_kernel_entries`] for the buffer protocol.
//
// # Safety
// `ensemble` must be a live handle; `buf` must hold `*len` doubles.
enum CplabStatus cplab_ensemble_weights(const struct CplabEnsemble *ensemble,
                                        double *buf,
                                        size_t *len);

// # Safety
// `ensemble` must be null or a handle not yet freed.
void cplab_ensemble_free(struct CplabEnsemble *ensemble);

// Intersection kernel of the ensemble over `(s, t]`; `epsilon` is read only in
// `EPSILON` mode.
//
// # Safety
// `ensemble` must be a live handle; `kernel` must be valid.
enum CplabStatus cplab_intersection_matrix(const struct CplabEnsemble *ensemble,
                                           int64_t s,
                                           int64_t t,
                                           enum CplabKernelMode mode,
                                           double epsilon,
                                           struct CplabKernel **kernel);

// Side length of the kernel matrix; 0 for a null handle.
//
// # Safety
// `kernel` must be null or a live handle.
size_t cplab_kernel_size(const struct CplabKernel *kernel);

// Copies the kernel in column-major order. On entry `*len` is the capacity of `buf`; on
// exit it is the number of entries. A short buffer returns `BUFFER_TOO_SMALL` and copies
// nothing.
//
// # Safety
// `kernel` must be a live handle; `buf` must hold `*len` doubles.
enum CplabStatus cplab_kernel_entries(const struct CplabKernel *kernel, double *buf, size_t *len);

// # Safety
// `kernel` must be null or a handle not yet freed.
void cplab_kernel_free(struct CplabKernel *kernel);

// Standard factor of the kernel in the inner product weighted by the ensemble's
// localized masses, or the uniform one when `localized` is zero.
//
// # Safety
// Handles must be live; `factor` must be valid.
enum CplabStatus cplab_spectral_factorize(const struct CplabEnsemble *ensemble,
                                          const struct CplabKernel *kernel,
                                          int32_t localized,
                                          struct CplabFactor **factor);

// Number of retained modes; 0 for a null handle.
//
// # Safety
// `factor` must be null or a live handle.
size_t cplab_factor_rank(const struct CplabFactor *factor);

// Copies the retained eigenvalues, largest first.
//
// # Safety
// As [`cplab_kernel_entries`].
enum CplabStatus cplab_factor_eigenvalues(const struct CplabFactor *factor,
                                          double *buf,
                                          size_t *len);

// # Safety
// `factor` must be null or a handle not yet freed.
void cplab_factor_free(struct CplabFactor *factor);

// One Kahane GMC draw at strength `a`: the reweighted path weights. Draw `index` of
// master seed `seed` matches the CLI's `gmc-sim`.
//
// # Safety
// Handles must be live; `buf` must hold `*len` doubles.
enum CplabStatus cplab_kahane_gmc(const struct CplabEnsemble *ensemble,
                                  const struct CplabFactor *factor,
                                  double a,
                                  uint64_t seed,
                                  uint64_t index,
                                  double *buf,
                                  size_t *len);

// `E[(M 1)^n]` at strength `a`, exactly, for `n ≤ 4`.
//
// # Safety
// Handles must be live; `value` must be valid.
enum CplabStatus cplab_gmc_moment(const struct CplabEnsemble *ensemble,
                                  const struct CplabKernel *kernel,
                                  double a,
                                  size_t n,
                                  double *value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CPLAB_H */
