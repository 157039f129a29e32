#ifndef CAVITY_SHORTCUT_H
#define CAVITY_SHORTCUT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Number of population columns in a trajectory, in the order
// φ₁ φ₂ φ₃ φ₄ φ₅ |ef00⟩ |ff01⟩ |fe00⟩ |ff00⟩.
#define CS_TRACKED_STATES 9

// Buffer size for `cs_scenario_hash`: 64 hex digits and a NUL.
#define CS_HASH_LEN 65

typedef enum CsStatus {
  CS_STATUS_OK = 0,
  CS_STATUS_NULL_POINTER = 1,
  CS_STATUS_INVALID_ARGUMENT = 2,
  // The detuning ordering cannot realize the counter-diabatic coupling.
  CS_STATUS_SIGN_MISMATCH = 3,
  CS_STATUS_STEP_FAILURE = 4,
  // Norm, trace or positivity check failed after propagation.
  CS_STATUS_INVARIANT_VIOLATION = 5,
  CS_STATUS_NUMERICAL_FAILURE = 6,
  CS_STATUS_BUFFER_TOO_SMALL = 7,
  CS_STATUS_PANIC = 8,
} CsStatus;

typedef enum CsTask {
  // |φ₁⟩ → |φ₅⟩ with sin⁴ pulses.
  CS_TASK_TRANSFER = 0,
  // Bell state with Gaussian pulses.
  CS_TASK_ENTANGLE = 1,
} CsTask;

typedef enum CsMode {
  CS_MODE_ADIABATIC = 0,
  CS_MODE_CDD = 1,
  CS_MODE_AUX = 2,
  CS_MODE_AUX_ONLY = 3,
  CS_MODE_EFFECTIVE = 4,
  CS_MODE_EFFECTIVE_ONLY = 5,
} CsMode;

typedef enum CsMethod {
  // Adaptive Dormand–Prince 5(4).
  CS_METHOD_DOPRI = 0,
  // Fixed-step RK4 at the step ceiling.
  CS_METHOD_RK4 = 1,
} CsMethod;

// Opaque scenario: task, pulses, detunings, rates, truncation, integrator.
typedef struct CsScenario CsScenario;

// Opaque result of `cs_run`.
typedef struct CsTrajectory CsTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// NUL-terminated message of the last failure on this thread, or NULL.
// Valid until the next failing call on the same thread.
const char *cs_last_error(void);

// Library version as a static NUL-terminated string.
const char *cs_version(void);

// New scenario with the defaults for `task` (a `CsTask` value): mode aux,
// no decoherence, detunings (6, 7). Returns NULL for an unknown task.
struct CsScenario *cs_scenario_new(uint32_t task);

// # Safety
// `s` must be NULL or a handle from `cs_scenario_new` not yet freed.
void cs_scenario_free(struct CsScenario *s);

// # Safety
// `s` must be a live scenario handle.
enum CsStatus cs_scenario_set_mode(struct CsScenario *s, uint32_t mode);

// Peak drive Ω₀ (Ω₀′ for entanglement) and operation time T, in units of g.
//
// # Safety
// `s` must be a live scenario handle.
enum CsStatus cs_scenario_set_pulses(struct CsScenario *s, double omega0, double big_t);

// Pulse delay as a fraction of T (transfer only).
//
// # Safety
// `s` must be a live scenario handle.
enum CsStatus cs_scenario_set_tau_frac(struct CsScenario *s, double tau_frac);

// Gaussian centre offset θ and width w, as fractions of T (entanglement only).
//
// # Safety
// `s` must be a live scenario handle.
enum CsStatus cs_scenario_set_gaussian(struct CsScenario *s, double theta, double w);

// # Safety
// `s` must be a live scenario handle.
enum CsStatus cs_scenario_set_detunings(struct CsScenario *s, double delta1, double delta2);

// Atomic decay Γ and cavity loss κ; both zero selects unitary evolution.
//
// # Safety
// `s` must be a live scenario handle.
enum CsStatus cs_scenario_set_decoherence(struct CsScenario *s, double gamma, double kappa);

// Photon cutoffs of modes a and b.
//
// # Safety
// `s` must be a live scenario handle.
enum CsStatus cs_scenario_set_truncation(struct CsScenario *s, size_t n_max_a, size_t n_max_b);

// Integrator (`CsMethod` value), output samples (rows = samples + 1) and
// tolerance.
//
// # Safety
// `s` must be a live scenario handle.
enum CsStatus cs_scenario_set_integrator(struct CsScenario *s,
                                         uint32_t method,
                                         size_t samples,
                                         double tol);

// Check the whole configuration without running it.
//
// # Safety
// `s` must be a live scenario handle.
enum CsStatus cs_scenario_validate(const struct CsScenario *s);

// SHA-256 of the resolved configuration as 64 hex digits plus NUL.
//
// # Safety
// `s` must be a live scenario handle; `buf` must hold `len` bytes.
enum CsStatus cs_scenario_hash(const struct CsScenario *s, char *buf, size_t len);

// Propagate the scenario from |φ₁⟩. Writes the final fidelity to
// `fidelity` (may be NULL) and, if `trajectory` is non-NULL, a new
// trajectory handle that the caller frees with `cs_trajectory_free`.
//
// # Safety
// `s` must be a live scenario handle; `fidelity` and `trajectory` must be
// NULL or valid for writes.
enum CsStatus cs_run(const struct CsScenario *s,
                     double *fidelity,
                     struct CsTrajectory **trajectory);

// # Safety
// `t` must be NULL or a handle from `cs_run` not yet freed.
void cs_trajectory_free(struct CsTrajectory *t);

// Number of samples (rows); 0 for NULL.
//
// # Safety
// `t` must be NULL or a live trajectory handle.
size_t cs_trajectory_len(const struct CsTrajectory *t);

// Dimension of the space that was integrated; 0 for NULL.
//
// # Safety
// `t` must be NULL or a live trajectory handle.
size_t cs_trajectory_dim(const struct CsTrajectory *t);

// Final fidelity; NaN for NULL.
//
// # Safety
// `t` must be NULL or a live trajectory handle.
double cs_trajectory_fidelity(const struct CsTrajectory *t);

// Copy the sample times into `buf` (at least `cs_trajectory_len` elements).
//
// # Safety
// `t` must be a live trajectory handle; `buf` must hold `len` doubles.
enum CsStatus cs_trajectory_times(const struct CsTrajectory *t, double *buf, size_t len);

// Copy the population of tracked state `state` (0 ≤ state < 9, see
// `CS_TRACKED_STATES`) at every sample into `buf`.
//
// # Safety
// `t` must be a live trajectory handle; `buf` must hold `len` doubles.
enum CsStatus cs_trajectory_population(const struct CsTrajectory *t,
                                       size_t state,
                                       double *buf,
                                       size_t len);

// Copy the norm (unitary runs) or trace (open runs) at every sample.
//
// # Safety
// `t` must be a live trajectory handle; `buf` must hold `len` doubles.
enum CsStatus cs_trajectory_trace(const struct CsTrajectory *t, double *buf, size_t len);

// Final fidelity for every (mode, T) pair, mode-major: `out[m * n_t + k]`.
// `modes` holds `CsMode` values. Failed points are NaN and counted in
// `failures` (may be NULL); the message of the last one is kept.
//
// # Safety
// `s` must be a live scenario handle; the arrays must hold the stated
// number of elements; `failures` must be NULL or writable.
enum CsStatus cs_sweep_duration(const struct CsScenario *s,
                                const uint32_t *modes,
                                size_t n_modes,
                                const double *t_values,
                                size_t n_t,
                                size_t jobs,
                                double *out,
                                size_t out_len,
                                size_t *failures);

// Final fidelity on the Γ × κ grid, Γ-major: `out[i * n_kappa + j]`.
// Failed points are NaN and counted in `failures` (may be NULL).
//
// # Safety
// `s` must be a live scenario handle; the arrays must hold the stated
// number of elements; `failures` must be NULL or writable.
enum CsStatus cs_sweep_decoherence(const struct CsScenario *s,
                                   const double *gammas,
                                   size_t n_gamma,
                                   const double *kappas,
                                   size_t n_kappa,
                                   size_t jobs,
                                   double *out,
                                   size_t out_len,
                                   size_t *failures);

// Sizes of the sets reachable from |φ₁⟩ under H₀, H₀ + H̃, and with the
// jump operators added, written to `sizes[0..3]`.
//
// # Safety
// `s` must be a live scenario handle; `sizes` must hold 3 elements.
enum CsStatus cs_check_closure(const struct CsScenario *s, size_t *sizes);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAVITY_SHORTCUT_H */
