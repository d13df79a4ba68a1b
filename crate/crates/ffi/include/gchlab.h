#ifndef GCHLAB_H
#define GCHLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GchStatus {
  GCH_STATUS_OK = 0,
  GCH_STATUS_NULL_POINTER = 1,
  GCH_STATUS_INVALID_ARGUMENT = 2,
  GCH_STATUS_CONFIG = 3,
  GCH_STATUS_NUMERICAL = 4,
  GCH_STATUS_IO = 5,
  GCH_STATUS_BUFFER_TOO_SMALL = 6,
  GCH_STATUS_PANIC = 7,
} GchStatus;

typedef enum GchForm {
  GCH_FORM_MOMENTUM = 0,
  GCH_FORM_VELOCITY = 1,
} GchForm;

// A finished particle run.
typedef struct GchEnsemble GchEnsemble;

// A finished Eulerian run.
typedef struct GchEulerRun GchEulerRun;

// Grid, filter bank and critical Besov norm.
typedef struct GchMeter GchMeter;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on the same thread.
const char *gch_last_error(void);

// Library version as a static NUL-terminated string.
const char *gch_version(void);

// Meter for the critical norm `B^{1/p}_{p,1}` on `n_points` nodes of `[-L, L)`.
//
// # Safety
// `out` must be valid for a pointer write.
enum GchStatus gch_meter_new(double half_length, size_t n_points, double p, struct GchMeter **out);

// # Safety
// `meter` must come from [`gch_meter_new`] and not be used afterwards.
void gch_meter_free(struct GchMeter *meter);

// Number of grid nodes.
//
// # Safety
// `meter` must be a live handle and `out` valid for a write.
enum GchStatus gch_meter_n_points(const struct GchMeter *meter, size_t *out);

// Highest dyadic block index of the bank.
//
// # Safety
// `meter` must be a live handle and `out` valid for a write.
enum GchStatus gch_meter_j_max(const struct GchMeter *meter, int32_t *out);

// Besov norm of the nodal values `values[0..len]`.
//
// # Safety
// `values` must hold `len` doubles and `out` be valid for a write.
enum GchStatus gch_meter_norm(const struct GchMeter *meter,
                              const double *values,
                              size_t len,
                              double *out);

// Dyadic block `j` of `values`, written to `block[0..len]`.
//
// # Safety
// `values` and `block` must each hold `len` doubles.
enum GchStatus gch_meter_block(const struct GchMeter *meter,
                               int32_t j,
                               const double *values,
                               double *block,
                               size_t len);

// Eulerian run from momentum `m0` with the default controls for step `dt`.
// An aborted run still succeeds; query it with [`gch_euler_run_abort`].
//
// # Safety
// `meter` must be live, `m0` hold `len` doubles and `out` be valid for a write.
enum GchStatus gch_euler_run_new(const struct GchMeter *meter,
                                 const double *m0,
                                 size_t len,
                                 double dt,
                                 double t_end,
                                 enum GchForm form,
                                 struct GchEulerRun **out);

// # Safety
// `run` must come from [`gch_euler_run_new`] and not be used afterwards.
void gch_euler_run_free(struct GchEulerRun *run);

// Number of stored snapshots, the initial state included.
//
// # Safety
// `run` must be live and `out` valid for a write.
enum GchStatus gch_euler_run_snapshot_count(const struct GchEulerRun *run, size_t *out);

// Time and velocity of snapshot `k`; `u` receives `len` values.
//
// # Safety
// `run` must be live, `t` valid for a write and `u` hold `len` doubles.
enum GchStatus gch_euler_run_snapshot(const struct GchEulerRun *run,
                                      size_t k,
                                      double *t,
                                      double *u,
                                      size_t len);

// `*aborted` tells whether the run stopped early and `*t` when it stopped.
//
// # Safety
// `run` must be live; `aborted` and `t` valid for writes.
enum GchStatus gch_euler_run_abort(const struct GchEulerRun *run, bool *aborted, double *t);

// Particle run from momentum `m0` on `n_points` nodes of `[-L, L)`, with
// one particle per node.
//
// # Safety
// `m0` must hold `n_points` doubles and `out` be valid for a write.
enum GchStatus gch_ensemble_new(double half_length,
                                const double *m0,
                                size_t n_points,
                                double dt,
                                double t_end,
                                struct GchEnsemble **out);

// # Safety
// `ens` must come from [`gch_ensemble_new`] and not be used afterwards.
void gch_ensemble_free(struct GchEnsemble *ens);

// Smallest `y_xi` seen, whether it fell below one half, and the crossing
// time (NaN when it did not).
//
// # Safety
// `ens` must be live; the three outputs valid for writes.
enum GchStatus gch_ensemble_breaking(const struct GchEnsemble *ens,
                                     double *min_yxi,
                                     bool *breached,
                                     double *t_breach);

// Final time and the final velocity interpolated back to the label grid.
//
// # Safety
// `ens` must be live, `t` valid for a write and `u` hold `len` doubles.
enum GchStatus gch_ensemble_velocity(const struct GchEnsemble *ens,
                                     double *t,
                                     double *u,
                                     size_t len);

// Runs the experiment named in the TOML file at `config_path` and writes its
// outputs under `out_dir`. `*passed` receives the overall verdict.
//
// # Safety
// `config_path` and `out_dir` must be NUL-terminated; `passed` valid for a write.
enum GchStatus gch_run_experiment(const char *config_path, const char *out_dir, bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GCHLAB_H */
