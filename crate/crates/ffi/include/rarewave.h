#ifndef RAREWAVE_H
#define RAREWAVE_H

/* Generated by cbindgen from rarewave-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Zero is success; everything else
 * identifies the first reason the call could not complete.
 */
typedef enum RwStatus {
  RW_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RW_STATUS_NULL_POINTER = 1,
  /**
   * A numeric argument was rejected (nonpositive density or temperature,
   * nonfinite input, nonpositive heat capacity, ...).
   */
  RW_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The two end states do not lie on one isentrope.
   */
  RW_STATUS_ENTROPY_MISMATCH = 3,
  /**
   * The end states need a compressive wave; no shock-free solution exists.
   */
  RW_STATUS_SHOCK_REQUIRED = 4,
  /**
   * The fans would pull the middle sound speed to or below zero.
   */
  RW_STATUS_VACUUM_FORMATION = 5,
  /**
   * A sampling time was negative or NaN.
   */
  RW_STATUS_NEGATIVE_TIME = 6,
  /**
   * The underlying implementation panicked; the handle is still valid
   * but the call performed no work.
   */
  RW_STATUS_PANIC = 7,
} RwStatus;

/**
 * Opaque gas description: heat capacity and derived constants.
 */
typedef struct RwGas RwGas;

/**
 * Opaque exact shock-free solution of a Riemann problem.
 */
typedef struct RwSolution RwSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the library, as a static NUL-terminated string.
 */
const char *rw_version(void);

/**
 * Static NUL-terminated description of a status code.
 */
const char *rw_status_message(enum RwStatus status);

/**
 * Create a gas with heat capacity `c_v > 0`. On success writes a handle
 * that must be released with `rw_gas_free`.
 */
enum RwStatus rw_gas_new(double c_v, struct RwGas **out);

void rw_gas_free(struct RwGas *gas);

/**
 * Adiabatic exponent `(c_v + 1) / c_v`.
 */
enum RwStatus rw_gas_gamma(const struct RwGas *gas, double *out);

/**
 * Heat capacity the gas was built with.
 */
enum RwStatus rw_gas_heat_capacity(const struct RwGas *gas, double *out);

/**
 * Specific entropy `c_v ln(theta) - ln(rho)` of a positive state.
 */
enum RwStatus rw_entropy(const struct RwGas *gas, double rho, double theta, double *out);

/**
 * Pressure `rho * theta` of a positive state.
 */
enum RwStatus rw_pressure(const struct RwGas *gas, double rho, double theta, double *out);

/**
 * Temperature of the state with density `rho` on the isentrope `s`.
 */
enum RwStatus rw_temperature_from_entropy(const struct RwGas *gas,
                                          double rho,
                                          double s,
                                          double *out);

/**
 * Sound speed of the state with density `rho` on the isentrope `s`.
 */
enum RwStatus rw_sound_speed(const struct RwGas *gas, double rho, double s, double *out);

/**
 * Solve the Riemann problem with end states `(rho, theta, u)` left and
 * right of the origin. Succeeds only when the exact solution is a pair of
 * rarefaction fans; the statuses `RW_STATUS_ENTROPY_MISMATCH`,
 * `RW_STATUS_SHOCK_REQUIRED` and `RW_STATUS_VACUUM_FORMATION` report the
 * three ways the data can fail that requirement. On success writes a
 * handle that must be released with `rw_solution_free`; the gas handle may
 * be freed immediately afterwards.
 */
enum RwStatus rw_solution_new(const struct RwGas *gas,
                              double left_rho,
                              double left_theta,
                              double left_u,
                              double right_rho,
                              double right_theta,
                              double right_u,
                              struct RwSolution **out);

void rw_solution_free(struct RwSolution *sol);

/**
 * Common specific entropy of the whole wave.
 */
enum RwStatus rw_solution_entropy(const struct RwSolution *sol, double *out);

/**
 * Constant state between the two fans.
 */
enum RwStatus rw_solution_middle(const struct RwSolution *sol,
                                 double *rho,
                                 double *theta,
                                 double *u);

/**
 * Similarity coordinates `xi = x1 / t` of the four fan edges, ordered
 * `fan1_lo <= fan1_hi <= fan2_lo <= fan2_hi`.
 */
enum RwStatus rw_solution_fan_edges(const struct RwSolution *sol,
                                    double *fan1_lo,
                                    double *fan1_hi,
                                    double *fan2_lo,
                                    double *fan2_hi);

/**
 * State of the self-similar profile at `xi = x1 / t`. Total over all real
 * `xi`; NaN is rejected.
 */
enum RwStatus rw_solution_sample(const struct RwSolution *sol,
                                 double xi,
                                 double *rho,
                                 double *theta,
                                 double *u);

/**
 * Profile at time `t >= 0` on `len` stations `x1[0..len]`, written to the
 * three parallel output arrays. The pointers may be null only when
 * `len == 0`. At `t == 0` the profile is the initial jump.
 */
enum RwStatus rw_solution_sample_field(const struct RwSolution *sol,
                                       double t,
                                       const double *x1,
                                       size_t len,
                                       double *rho,
                                       double *theta,
                                       double *u);

/**
 * Relative energy density of the state `(rho, theta, (u1, u2))` against
 * the reference `(ref_rho, ref_theta, (ref_u1, ref_u2))`. Nonnegative,
 * and zero exactly at the reference.
 */
enum RwStatus rw_relative_energy_density(const struct RwGas *gas,
                                         double rho,
                                         double theta,
                                         double u1,
                                         double u2,
                                         double ref_rho,
                                         double ref_theta,
                                         double ref_u1,
                                         double ref_u2,
                                         double *out);

/**
 * Reduced production bound `G(y, z)` for heat capacity `c_v`; nonpositive
 * on its whole domain `y > 0`.
 */
enum RwStatus rw_reduced_bound(double c_v, double y, double z, double *out);

/**
 * Entropy-production bound of the state `(rho, s)` against the reference
 * `(ref_rho, ref_s)`, including the reference-temperature factor.
 */
enum RwStatus rw_production_bound(const struct RwGas *gas,
                                  double rho,
                                  double s,
                                  double ref_rho,
                                  double ref_s,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RAREWAVE_H */
