#ifndef RMFNN_H
#define RMFNN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RmfnnStatus {
  RMFNN_STATUS_OK = 0,
  // Bad argument, configuration or unsupported request.
  RMFNN_STATUS_INVALID_ARGUMENT = 1,
  // Non-finite values during training or evaluation.
  RMFNN_STATUS_NUMERICAL = 2,
  // File missing or unreadable, or malformed content.
  RMFNN_STATUS_IO = 3,
  RMFNN_STATUS_NULL_POINTER = 4,
  RMFNN_STATUS_PANIC = 5,
} RmfnnStatus;

// A surrogate loaded from a bundle directory.
typedef struct RmfnnBundle RmfnnBundle;

typedef struct RmfnnCostInputs {
  double w_hf;
  double w_lf;
  double w_dnn;
  double w_resnn;
  double w_t1;
  double w_t2;
  uint64_t n_i;
  uint64_t n;
  uint64_t n_theta;
} RmfnnCostInputs;

typedef struct RmfnnCostTotals {
  double w_rmfnn;
  double w_hfm;
  double w_hfnn;
} RmfnnCostTotals;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *rmfnn_version(void);

// Copy the calling thread's last error message into `buf` (NUL terminated,
// truncated to `len - 1` bytes). Returns the full message length without the
// terminator, or 0 when there is no error.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t rmfnn_last_error_message(char *buf, size_t len);

// Load the bundle saved in directory `path`. Free it with [`rmfnn_bundle_free`].
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum RmfnnStatus rmfnn_bundle_load(const char *path, struct RmfnnBundle **out);

// # Safety
// `bundle` must be null or a handle from [`rmfnn_bundle_load`] not freed before.
void rmfnn_bundle_free(struct RmfnnBundle *bundle);

// Number of parameters the bundle's surrogate expects.
//
// # Safety
// Pointers must be valid.
enum RmfnnStatus rmfnn_bundle_input_dim(const struct RmfnnBundle *bundle, size_t *out);

// Evaluate the surrogate at one point of `dim` parameters.
//
// # Safety
// `theta` must point to `dim` values; other pointers must be valid.
enum RmfnnStatus rmfnn_bundle_predict(const struct RmfnnBundle *bundle,
                                      const double *theta,
                                      size_t dim,
                                      double *out);

// Evaluate `n` row-major points of `dim` parameters into `out[0..n]`.
//
// # Safety
// `thetas` must point to `n * dim` values and `out` to `n` writable values.
enum RmfnnStatus rmfnn_bundle_predict_batch(const struct RmfnnBundle *bundle,
                                            const double *thetas,
                                            size_t n,
                                            size_t dim,
                                            double *out);

// Monte-Carlo estimate of the surrogate's mean over its parameter domain.
//
// # Safety
// Pointers must be valid.
enum RmfnnStatus rmfnn_bundle_mc(const struct RmfnnBundle *bundle,
                                 uint64_t n_theta,
                                 uint64_t seed,
                                 double *value,
                                 double *stderr);

// Reference quantity of interest of a named problem (`damped`, `pulsed`,
// `ivp` or `wave`) at one parameter point.
//
// # Safety
// `problem` must be a NUL-terminated string, `theta` must point to `dim` values.
enum RmfnnStatus rmfnn_problem_reference(const char *problem,
                                         const double *theta,
                                         size_t dim,
                                         double *out);

// Estimator costs without and with network training.
//
// # Safety
// `inputs` must be valid; either output may be null.
enum RmfnnStatus rmfnn_cost_totals(const struct RmfnnCostInputs *inputs,
                                   struct RmfnnCostTotals *without_training,
                                   struct RmfnnCostTotals *with_training);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RMFNN_H */
