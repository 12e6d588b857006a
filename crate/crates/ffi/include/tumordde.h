#ifndef TUMORDDE_H
#define TUMORDDE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TdStatus {
  TD_STATUS_OK = 0,
  TD_STATUS_NULL_POINTER = 1,
  TD_STATUS_INVALID_ARGUMENT = 2,
  TD_STATUS_INADMISSIBLE = 3,
  TD_STATUS_NO_CROSSING = 4,
  TD_STATUS_NUMERIC = 5,
  TD_STATUS_BUFFER_TOO_SMALL = 6,
  TD_STATUS_PANIC = 7,
} TdStatus;

// Opaque model handle.
typedef struct TdModel TdModel;

// Opaque trajectory handle.
typedef struct TdTrajectory TdTrajectory;

// A certified crossing.
typedef struct TdHopfPoint {
  double omega;
  double tau_crit;
  // Real and imaginary parts of d lambda / d tau1.
  double d_re;
  double d_im;
  // |Delta(i omega, tau_crit)|.
  double residual;
  uint32_t branch;
} TdHopfPoint;

// Normal-form quantities at the first crossing. The sign fields are
// +1, -1 or 0 (degenerate): `direction` is +1 when supercritical,
// `stability` +1 when orbitally stable, `period_trend` +1 when the period
// increases.
typedef struct TdNormalForm {
  double omega;
  double tau_crit;
  double g20_re;
  double g20_im;
  double g11_re;
  double g11_im;
  double g02_re;
  double g02_im;
  double g21_re;
  double g21_im;
  double c1_re;
  double c1_im;
  double mu2;
  double beta2;
  double t2;
  int32_t direction;
  int32_t stability;
  int32_t period_trend;
} TdNormalForm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a model. Parameters must be positive and satisfy
// `b2/b1 < b4/b3 < a1/a2`.
//
// # Safety
// `out` must be null or valid for writing one pointer.
enum TdStatus td_model_new(double a1,
                           double a2,
                           double b1,
                           double b2,
                           double b3,
                           double b4,
                           struct TdModel **out);

// Releases a model. Null is ignored.
//
// # Safety
// `m` must be null or a handle from [`td_model_new`] not yet freed.
void td_model_free(struct TdModel *m);

// Interior equilibrium.
//
// # Safety
// `m` must be a live handle; `x0` and `y0` must be valid for writing.
enum TdStatus td_equilibrium_l0(const struct TdModel *m, double *x0, double *y0);

// The `branch`-th (1-based) crossing for point lags, `tau2` fixed.
//
// # Safety
// `m` must be a live handle; `out` must be valid for writing.
enum TdStatus td_hopf_dd(const struct TdModel *m,
                         double tau2,
                         uint32_t branch,
                         struct TdHopfPoint *out);

// First crossing for a point lag on x and weak kernel rate `q2` on y.
//
// # Safety
// `m` must be a live handle; `out` must be valid for writing.
enum TdStatus td_hopf_dw(const struct TdModel *m, double q2, struct TdHopfPoint *out);

// Normal form at the first point-lag crossing.
//
// # Safety
// `m` must be a live handle; `out` must be valid for writing.
enum TdStatus td_normal_form_dd(const struct TdModel *m, double tau2, struct TdNormalForm *out);

// Normal form at the first weak-kernel crossing.
//
// # Safety
// `m` must be a live handle; `out` must be valid for writing.
enum TdStatus td_normal_form_dw(const struct TdModel *m, double q2, struct TdNormalForm *out);

// Point-lag simulation from the history `L0 + (delta, delta)`.
//
// # Safety
// `m` must be a live handle; `out` must be valid for writing one pointer.
enum TdStatus td_simulate_dd(const struct TdModel *m,
                             double tau1,
                             double tau2,
                             double delta,
                             double t_end,
                             double dt,
                             struct TdTrajectory **out);

// Weak-kernel simulation through the three-variable chain system.
//
// # Safety
// `m` must be a live handle; `out` must be valid for writing one pointer.
enum TdStatus td_simulate_chain(const struct TdModel *m,
                                double tau1,
                                double q2,
                                double delta,
                                double t_end,
                                double dt,
                                struct TdTrajectory **out);

// Number of stored samples; 0 for null.
//
// # Safety
// `t` must be null or a live trajectory handle.
size_t td_trajectory_len(const struct TdTrajectory *t);

// Components per sample (2 or 3); 0 for null.
//
// # Safety
// `t` must be null or a live trajectory handle.
size_t td_trajectory_dim(const struct TdTrajectory *t);

// 1 if the run was truncated by blow-up, 0 otherwise or for null.
//
// # Safety
// `t` must be null or a live trajectory handle.
int32_t td_trajectory_blew_up(const struct TdTrajectory *t);

// Copies sample times (`capacity` entries) and states in original
// coordinates (`capacity * dim` entries, row-major). Either buffer may be
// null to skip it.
//
// # Safety
// `t` must be a live handle; non-null buffers must hold the stated sizes.
enum TdStatus td_trajectory_copy(const struct TdTrajectory *t,
                                 double *times,
                                 double *states,
                                 size_t capacity);

// Releases a trajectory. Null is ignored.
//
// # Safety
// `t` must be null or a handle not yet freed.
void td_trajectory_free(struct TdTrajectory *t);

// Message for the last failed call on this thread; empty after a success.
// Valid until the next call into this library on the same thread.
const char *td_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *td_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TUMORDDE_H */
