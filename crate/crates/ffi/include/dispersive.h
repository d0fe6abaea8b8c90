#ifndef DISPERSIVE_H
#define DISPERSIVE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum DspStatus {
  DSP_STATUS_OK = 0,
  DSP_STATUS_NULL_POINTER = 1,
  DSP_STATUS_DOMAIN = 2,
  DSP_STATUS_CONFIG = 3,
  DSP_STATUS_GRID_MISMATCH = 4,
  DSP_STATUS_UNRESOLVED = 5,
  DSP_STATUS_BLOW_UP = 6,
  DSP_STATUS_OUTSIDE_LAMBDA = 7,
  DSP_STATUS_IO = 8,
  DSP_STATUS_FORMAT = 9,
  DSP_STATUS_BUFFER_TOO_SMALL = 10,
  DSP_STATUS_PANIC = 11,
} DspStatus;

/**
 * Opaque complex field on a periodic grid.
 */
typedef struct DspField DspField;

/**
 * Opaque Whitham-Boussinesq integrator with its current state.
 */
typedef struct DspSolver DspSolver;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *dsp_status_message(enum DspStatus status);

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len - 1` bytes) and returns the full message length.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t dsp_last_error(char *buf, size_t len);

/**
 * `m_beta(r)` for `beta` in {0, 1}.
 *
 * # Safety
 * `result` must be a valid pointer.
 */
enum DspStatus dsp_eval_m(uint8_t beta_switch, double r, double *result);

/**
 * `k`-th derivative of `m_beta` at `r`.
 *
 * # Safety
 * `result` must be a valid pointer.
 */
enum DspStatus dsp_eval_m_derivative(uint8_t beta_switch, double r, size_t k, double *result);

/**
 * Dispersive constant `c_{beta,d}(lambda)`; `lambda` must be a power of two.
 *
 * # Safety
 * `result` must be a valid pointer.
 */
enum DspStatus dsp_c_coeff(uint8_t beta_switch, size_t d, double lambda, double *result);

/**
 * Bessel function `J_alpha(r)`.
 *
 * # Safety
 * `result` must be a valid pointer.
 */
enum DspStatus dsp_bessel_j(double alpha, double r, double *result);

/**
 * Builds a field from grid values. `im` may be null for a real field.
 *
 * # Safety
 * `re` (and `im` when not null) must hold `len` values; `field` must be a
 * valid pointer.
 */
enum DspStatus dsp_field_from_values(size_t d,
                                     size_t n,
                                     double length,
                                     const double *re,
                                     const double *im,
                                     size_t len,
                                     struct DspField **field);

/**
 * Number of grid values `n^d` of a field.
 *
 * # Safety
 * `field` must be a handle from this library and `size` a valid pointer.
 */
enum DspStatus dsp_field_size(const struct DspField *field, size_t *size);

/**
 * Copies the grid values of a field. `im` may be null.
 *
 * # Safety
 * `re` (and `im` when not null) must have room for `len` values.
 */
enum DspStatus dsp_field_values(const struct DspField *field, double *re, double *im, size_t len);

/**
 * `L^2` norm of a field over the box.
 *
 * # Safety
 * `field` must be a handle from this library and `result` a valid pointer.
 */
enum DspStatus dsp_field_l2_norm(const struct DspField *field, double *result);

/**
 * Free flow `exp(-i sign t m_beta(|D|)) f` into a new field; `sign` is `+1`
 * or `-1`.
 *
 * # Safety
 * `field` must be a handle from this library and `result` a valid pointer.
 */
enum DspStatus dsp_field_propagate(const struct DspField *field,
                                   uint8_t beta_switch,
                                   int32_t sign,
                                   double t,
                                   struct DspField **result);

/**
 * Releases a field; null is ignored.
 *
 * # Safety
 * `field` must be null or a handle from this library not yet freed.
 */
void dsp_field_free(struct DspField *field);

/**
 * Creates a solver from a JSON config (the `solve` config fields `grid`,
 * `dt`, `T`, `integrator`, `dealias`, `nonlinear`, `s`, `frame_every`,
 * `blowup_threshold`) and real initial data: `eta` with `n^d` values and
 * curl-free, mean-zero `v` with `d n^d` values.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string, the arrays must hold the
 * stated counts and `solver` must be a valid pointer.
 */
enum DspStatus dsp_solver_new(const char *config_json,
                              const double *eta,
                              const double *v,
                              size_t len,
                              struct DspSolver **solver);

/**
 * Advances by `steps` steps of the configured size, re-projecting onto
 * real fields after each. On blow-up the state is left at the last valid
 * step.
 *
 * # Safety
 * `solver` must be a handle from this library.
 */
enum DspStatus dsp_solver_advance(struct DspSolver *solver, size_t steps);

/**
 * Current time.
 *
 * # Safety
 * `solver` must be a handle from this library and `t` a valid pointer.
 */
enum DspStatus dsp_solver_time(const struct DspSolver *solver, double *t);

/**
 * Current size `||u_+||_{H^s} + ||u_-||_{H^s}` with the configured `s`.
 *
 * # Safety
 * `solver` must be a handle from this library and `size` a valid pointer.
 */
enum DspStatus dsp_solver_size(const struct DspSolver *solver, double *size);

/**
 * Copies the current surface elevation (`n^d` values).
 *
 * # Safety
 * `eta` must have room for `len` values.
 */
enum DspStatus dsp_solver_eta(const struct DspSolver *solver, double *eta, size_t len);

/**
 * Copies the current velocity (`d n^d` values, component-major).
 *
 * # Safety
 * `v` must have room for `len` values.
 */
enum DspStatus dsp_solver_velocity(const struct DspSolver *solver, double *v, size_t len);

/**
 * Releases a solver; null is ignored.
 *
 * # Safety
 * `solver` must be null or a handle from this library not yet freed.
 */
void dsp_solver_free(struct DspSolver *solver);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DISPERSIVE_H */
