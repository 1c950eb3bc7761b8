#ifndef EMRATES_H
#define EMRATES_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EmMethod {
  EM_METHOD_CLOSED_FORM = 0,
  EM_METHOD_ORACLE = 1,
} EmMethod;

typedef enum EmStatus {
  EM_STATUS_OK = 0,
  EM_STATUS_NULL_POINTER = 1,
  EM_STATUS_INVALID_PARAMETER = 2,
  EM_STATUS_IMAGE_SUM_TRUNCATION = 3,
  EM_STATUS_STEP_UNDERFLOW = 4,
  EM_STATUS_UNSUPPORTED_POLARIZATION = 5,
  EM_STATUS_ORACLE_NON_CONVERGENCE = 6,
  EM_STATUS_PANIC = 7,
} EmStatus;

typedef struct EmAtom EmAtom;

typedef struct EmRates EmRates;

typedef struct EmScenario EmScenario;

typedef struct EmSpectralRates {
  double g_plus;
  double g_minus;
  double a_down;
  double a_up;
  double g_plus_error;
  double g_minus_error;
} EmSpectralRates;

typedef struct EmEnergyRates {
  double vf_excited;
  double vf_ground;
  double rr_any_state;
  double total_excited;
  double total_ground;
} EmEnergyRates;

/*
 `f_y` and `f_z` are NaN for accelerated scenarios.
 */
typedef struct EmBoundary {
  double f_x;
  double f_y;
  double f_z;
} EmBoundary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. Valid until the
 next call on the same thread.
 */
const char *em_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *em_version(void);

/*
 `alpha_*` are the polarization weights; each in [0, 1], summing to 1.

 # Safety
 `out` must be valid for writes.
 */
enum EmStatus em_atom_new(double omega0,
                          double gamma0,
                          double alpha_x,
                          double alpha_y,
                          double alpha_z,
                          struct EmAtom **out);

/*
 # Safety
 `atom` must come from `em_atom_new` and not be used afterwards. NULL is
 ignored.
 */
void em_atom_free(struct EmAtom *atom);

/*
 # Safety
 `out` must be valid for writes.
 */
enum EmStatus em_scenario_free_space(struct EmScenario **out);

/*
 `beta = INFINITY` is zero temperature.

 # Safety
 `out` must be valid for writes.
 */
enum EmStatus em_scenario_static_mirror(double z0, double beta, struct EmScenario **out);

/*
 # Safety
 `out` must be valid for writes.
 */
enum EmStatus em_scenario_accelerated(double a, double z0, struct EmScenario **out);

/*
 # Safety
 `scenario` must come from an `em_scenario_*` constructor and not be used
 afterwards. NULL is ignored.
 */
void em_scenario_free(struct EmScenario *scenario);

/*
 Spectral rates with the default oracle controls when `method` is
 `Oracle`.

 # Safety
 `scenario` and `atom` must be live handles, `out` valid for writes.
 */
enum EmStatus em_rates_compute(const struct EmScenario *scenario,
                               const struct EmAtom *atom,
                               enum EmMethod method,
                               struct EmRates **out);

/*
 # Safety
 `rates` must come from `em_rates_compute` and not be used afterwards.
 NULL is ignored.
 */
void em_rates_free(struct EmRates *rates);

/*
 # Safety
 `rates` must be a live handle, `out` valid for writes.
 */
enum EmStatus em_rates_get(const struct EmRates *rates, struct EmSpectralRates *out);

/*
 # Safety
 `rates` must be a live handle, `out` valid for writes.
 */
enum EmStatus em_energy_rates(const struct EmRates *rates,
                              double omega0,
                              struct EmEnergyRates *out);

/*
 Boundary functions of `scenario` at transition frequency `omega0`; all
 zero in free space.

 # Safety
 `scenario` must be a live handle, `out` valid for writes.
 */
enum EmStatus em_boundary_functions(const struct EmScenario *scenario,
                                    double omega0,
                                    struct EmBoundary *out);

/*
 Mean energy at `n` times for an ensemble starting with the given excited
 fraction, written to `energy_out[0..n]`.

 # Safety
 `rates` must be a live handle; `times` and `energy_out` must point to `n`
 readable and writable doubles respectively.
 */
enum EmStatus em_relaxation(const struct EmRates *rates,
                            double omega0,
                            double excited_fraction,
                            const double *times,
                            size_t n,
                            double *energy_out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* EMRATES_H */
