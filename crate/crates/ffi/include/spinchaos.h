/* C interface to the spinchaos collective-spin simulation library. */

#ifndef SPINCHAOS_H
#define SPINCHAOS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SpinStatus {
  SPIN_STATUS_OK = 0,
  SPIN_STATUS_INVALID_ARG = 1,
  SPIN_STATUS_NULL_PTR = 2,
  SPIN_STATUS_NUMERICAL_ERROR = 3,
} SpinStatus;

// Opaque quantum state handle: a Dicke basis plus amplitudes.
typedef struct SpinState SpinState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a NUL-terminated static string.
const char *spinchaos_version(void);

// New spin-coherent state of N spins along (theta, phi).
//
// # Safety
// `out` must point to writable storage for one pointer.
enum SpinStatus spinchaos_state_new_coherent(uintptr_t n,
                                             double theta,
                                             double phi,
                                             struct SpinState **out);

// New J_z eigenstate |mu>, index 0 meaning mu = -N/2.
//
// # Safety
// `out` must point to writable storage for one pointer.
enum SpinStatus spinchaos_state_new_fock(uintptr_t n, uintptr_t index, struct SpinState **out);

// # Safety
// `state` must come from a spinchaos constructor; NULL is a no-op.
void spinchaos_state_free(struct SpinState *state);

// # Safety
// `state` and `out` must be valid pointers.
enum SpinStatus spinchaos_state_dim(const struct SpinState *state, uintptr_t *out);

// Copies the amplitudes into caller buffers of length `len` (= N+1).
//
// # Safety
// `re` and `im` must hold at least `len` doubles.
enum SpinStatus spinchaos_state_amplitudes(const struct SpinState *state,
                                           double *re,
                                           double *im,
                                           uintptr_t len);

// Quantum Fisher information of the state (largest eigenvalue of the
// 4x covariance matrix over J_x, J_y, J_z).
//
// # Safety
// `state` and `out` must be valid pointers.
enum SpinStatus spinchaos_qfi(const struct SpinState *state, double *out);

// First moments <J_i> (3 doubles) and symmetrised second moments
// (9 doubles, row-major) of the state.
//
// # Safety
// `first` must hold 3 doubles and `second` 9 doubles.
enum SpinStatus spinchaos_moments(const struct SpinState *state, double *first, double *second);

// Entanglement depth witnessed by QFI value `f` for `n` spins.
//
// # Safety
// `out` must be a valid pointer.
enum SpinStatus spinchaos_depth_witness(double f, uintptr_t n, uintptr_t *out);

// Evolves the state in place under H = a J_x + sign (c/N) J_z^2 for
// time `t` in steps of `dt`.
//
// # Safety
// `state` must come from a spinchaos constructor.
enum SpinStatus spinchaos_evolve_const(struct SpinState *state,
                                       double a,
                                       double c,
                                       double sign,
                                       double t,
                                       double dt);

// Evolves the state in place through `periods` rectangular kicks of
// strength `amp` (width 0.01, free interval 1) on a grid of step `dt`.
//
// # Safety
// `state` must come from a spinchaos constructor.
enum SpinStatus spinchaos_evolve_kicked(struct SpinState *state,
                                        double amp,
                                        double c,
                                        double sign,
                                        uintptr_t periods,
                                        double dt);

// Closed-form one-axis-twisting QFI at time t.
double spinchaos_fq_oat_closed(uintptr_t n, double c, double t);

// Closed-form moment-truncation QFI at time t.
double spinchaos_fb_oat_closed(uintptr_t n, double c, double t);

// Largest Lyapunov exponent of the kicked classical limit from the
// x-pole seed, `m` periods, initial separation `delta0`.
//
// # Safety
// `out` must be a valid pointer.
enum SpinStatus spinchaos_lyapunov(double amp, double c, uintptr_t m, double delta0, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINCHAOS_H */
