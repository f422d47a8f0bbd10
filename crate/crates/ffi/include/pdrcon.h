#ifndef PDRCON_H
#define PDRCON_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum PdrconStatus {
  PDRCON_STATUS_OK = 0,
  PDRCON_STATUS_INVALID_ARGUMENT = 1,
  PDRCON_STATUS_NOT_A_PDCG = 2,
  PDRCON_STATUS_INCOMPATIBLE = 3,
  PDRCON_STATUS_VERTEX_SET_MISMATCH = 4,
  PDRCON_STATUS_NUMERIC_DOMAIN = 5,
  PDRCON_STATUS_FIT_FAILED = 6,
  PDRCON_STATUS_INGESTION = 7,
  PDRCON_STATUS_IO = 8,
  PDRCON_STATUS_PARSE = 9,
  PDRCON_STATUS_NULL_POINTER = 10,
  PDRCON_STATUS_BUFFER_TOO_SMALL = 11,
  PDRCON_STATUS_PANIC = 12,
} PdrconStatus;

// Search procedure selector for [`pdrcon_select`].
typedef enum PdrconProcedure {
  PDRCON_PROCEDURE_COHERENT = 0,
  PDRCON_PROCEDURE_NAIVE = 1,
} PdrconProcedure;

// A coloured graph for paired data.
typedef struct PdrconModel PdrconModel;

// A sample covariance matrix with its sample size.
typedef struct PdrconMoments PdrconMoments;

// Summary of a maximum-likelihood fit.
typedef struct PdrconFit {
  double loglik;
  double deviance;
  double p_value;
  size_t df;
  size_t iterations;
  bool converged;
} PdrconFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *pdrcon_version(void);

// Copies the calling thread's last error message into `buf`.
//
// # Safety
// `buf` must be null or valid for `buf_len` bytes; `needed` null or writable.
enum PdrconStatus pdrcon_last_error_message(char *buf, size_t buf_len, size_t *needed);

// Number of models on `p` variables, as a decimal string.
//
// # Safety
// As for [`pdrcon_last_error_message`].
enum PdrconStatus pdrcon_count_models(uint32_t p, char *buf, size_t buf_len, size_t *needed);

// Parses a model file (quadruplet JSON) into a new handle.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum PdrconStatus pdrcon_model_from_json(const char *json, struct PdrconModel **out);

// The saturated model on `p` variables.
//
// # Safety
// `out` must be writable.
enum PdrconStatus pdrcon_model_unit(uint32_t p, struct PdrconModel **out);

// # Safety
// `model` must be null or a handle from this library, not yet freed.
void pdrcon_model_free(struct PdrconModel *model);

// Canonical model JSON.
//
// # Safety
// `model` must be a live handle; buffer rules as above.
enum PdrconStatus pdrcon_model_to_json(const struct PdrconModel *model,
                                       char *buf,
                                       size_t buf_len,
                                       size_t *needed);

// Number of colour classes, i.e. free parameters.
//
// # Safety
// `model` must be a live handle; `out` writable.
enum PdrconStatus pdrcon_model_num_classes(const struct PdrconModel *model, size_t *out);

// Wraps a `p x p` covariance matrix given in row-major order.
//
// # Safety
// `cov` must point to `p * p` readable doubles; `out` writable.
enum PdrconStatus pdrcon_moments_new(const double *cov,
                                     size_t p,
                                     size_t n,
                                     struct PdrconMoments **out);

// # Safety
// `moments` must be null or a handle from this library, not yet freed.
void pdrcon_moments_free(struct PdrconMoments *moments);

// Fits `model` and tests it against the saturated model.
//
// # Safety
// Handles must be live; `out` writable.
enum PdrconStatus pdrcon_fit(const struct PdrconModel *model,
                             const struct PdrconMoments *moments,
                             struct PdrconFit *out);

// Backward elimination from the saturated model. `max_steps` of 0 means
// the library default. Writes a new model handle and the number of fitted
// models.
//
// # Safety
// `moments` must be live; `out_model` writable; `fitted_models` null or writable.
enum PdrconStatus pdrcon_select(const struct PdrconMoments *moments,
                                enum PdrconProcedure procedure,
                                double alpha,
                                size_t max_steps,
                                struct PdrconModel **out_model,
                                size_t *fitted_models);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PDRCON_H */
