#ifndef COVSEL_H
#define COVSEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CovselStatus {
  COVSEL_STATUS_OK = 0,
  COVSEL_STATUS_NULL_POINTER = 1,
  /**
   * Input failed validation (shape, symmetry, definiteness, structure).
   */
  COVSEL_STATUS_INVALID_INPUT = 2,
  /**
   * Quadrature, eigensolver or root finder did not converge.
   */
  COVSEL_STATUS_NUMERICAL_FAILURE = 3,
  COVSEL_STATUS_BUFFER_TOO_SMALL = 4,
  COVSEL_STATUS_PANIC = 5,
} CovselStatus;

/**
 * Validated correlation matrix.
 */
typedef struct CovselMatrix CovselMatrix;

/**
 * Result of [`covsel_analyze`].
 */
typedef struct CovselReport CovselReport;

typedef struct CovselSummary {
  size_t n;
  double kl;
  double reverse_kl;
  double jeffreys;
  double auc;
  double one_minus_auc;
  double auc_lower;
  double auc_upper;
  double auc_lower_asymptotic;
  double auc_upper_asymptotic;
  double d_star;
  double cam_trace;
} CovselSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *covsel_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *covsel_version(void);

/**
 * Validates the row-major `n × n` matrix at `data` and stores a new handle
 * in `*out`.
 *
 * # Safety
 * `data` must point to `n * n` readable doubles and `out` must be writable.
 */
enum CovselStatus covsel_matrix_new(const double *data, size_t n, struct CovselMatrix **out);

/**
 * # Safety
 * `m` must be NULL or a handle from [`covsel_matrix_new`] not yet freed.
 */
void covsel_matrix_free(struct CovselMatrix *m);

/**
 * Dimension of the matrix, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t covsel_matrix_dim(const struct CovselMatrix *m);

/**
 * Writes the `n − 1` Chow–Liu edges as `u0, v0, u1, v1, …` into `edges`,
 * which must hold `capacity` entries (at least `2(n − 1)`).
 *
 * # Safety
 * `m` must be a live handle and `edges` must point to `capacity` writable
 * `size_t` values.
 */
enum CovselStatus covsel_chow_liu(const struct CovselMatrix *m, size_t *edges, size_t capacity);

/**
 * Selects the model for the `n_edges` edges `u0, v0, u1, v1, …` and
 * evaluates divergences, the exact AUC and the bounds.
 *
 * # Safety
 * `m` must be a live handle, `edges` must point to `2 * n_edges` readable
 * `size_t` values (it may be NULL when `n_edges` is 0) and `out` must be
 * writable.
 */
enum CovselStatus covsel_analyze(const struct CovselMatrix *m,
                                 const size_t *edges,
                                 size_t n_edges,
                                 struct CovselReport **out);

/**
 * # Safety
 * `r` must be NULL or a handle from [`covsel_analyze`] not yet freed.
 */
void covsel_report_free(struct CovselReport *r);

/**
 * # Safety
 * `r` must be a live report handle and `out` writable.
 */
enum CovselStatus covsel_report_summary(const struct CovselReport *r, struct CovselSummary *out);

/**
 * Copies the CAM eigenvalues (descending) into `buf`. `*len` receives the
 * count even when the buffer is too small.
 *
 * # Safety
 * `r` must be a live report handle, `buf` must hold `capacity` writable
 * doubles and `len` must be writable.
 */
enum CovselStatus covsel_report_eigenvalues(const struct CovselReport *r,
                                            double *buf,
                                            size_t capacity,
                                            size_t *len);

/**
 * Exact AUC for the spectrum with dissimilarities `alphas[0..n]`.
 *
 * # Safety
 * `alphas` must point to `n` readable doubles (NULL allowed when `n` is 0)
 * and `out` must be writable.
 */
enum CovselStatus covsel_auc_from_alphas(const double *alphas, size_t n, double *out);

/**
 * Point on the feasible (AUC, KL) boundary at parameter `a > 0`.
 *
 * # Safety
 * `auc` and `kl` must be writable.
 */
enum CovselStatus covsel_feasible_region_point(double a, double *auc, double *kl);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVSEL_H */
