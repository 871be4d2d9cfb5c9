#ifndef QDOPT_H
#define QDOPT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QdoptStatus {
  QDOPT_STATUS_OK = 0,
  QDOPT_STATUS_NULL_POINTER = 1,
  QDOPT_STATUS_INVALID_ARGUMENT = 2,
  QDOPT_STATUS_NUMERIC = 3,
  QDOPT_STATUS_IO = 4,
  QDOPT_STATUS_CONFIG = 5,
  QDOPT_STATUS_PANIC = 6,
} QdoptStatus;

// Opaque grid handle.
typedef struct QdoptGrid QdoptGrid;

// Opaque Hamiltonian handle.
typedef struct QdoptModel QdoptModel;

// Opaque wavefunction handle.
typedef struct QdoptWavefunction QdoptWavefunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version string, valid for the life of the process.
const char *qdopt_version(void);

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t qdopt_last_error_message(char *buf, size_t len);

// Creates a grid from per-axis point counts, steps and offsets.
//
// # Safety
// The three arrays must hold `ndim` elements; `out` must be writable.
enum QdoptStatus qdopt_grid_new(size_t ndim,
                                const size_t *n_points,
                                const double *steps,
                                const double *offsets,
                                struct QdoptGrid **out_grid);

// The 32-point, 0.075 bohr four-axis grid `(R_x, R_y, r_cx, r_cy)`.
//
// # Safety
// `out_grid` must be writable.
enum QdoptStatus qdopt_grid_reference_reduced(struct QdoptGrid **out_grid);

// Number of grid points, or 0 for a null handle.
//
// # Safety
// `grid` must be null or a live handle.
size_t qdopt_grid_len(const struct QdoptGrid *grid);

// # Safety
// `grid` must be null or a handle not yet freed.
void qdopt_grid_free(struct QdoptGrid *grid);

// Reduced two-nuclei-one-electron model. `cap <= 0` selects `1/√(dx²+dy²)`.
//
// # Safety
// `grid` must be a live handle and `out_model` writable.
enum QdoptStatus qdopt_model_h2plus_reduced(const struct QdoptGrid *grid,
                                            double m1,
                                            double m2,
                                            double m_e,
                                            double cap,
                                            struct QdoptModel **out_model);

// Electron between two fixed unit charges at `(±r_sep/2, 0)`. `cap <= 0` selects the automatic cap.
//
// # Safety
// `grid` must be a live handle and `out_model` writable.
enum QdoptStatus qdopt_model_point_charge(const struct QdoptGrid *grid,
                                          double r_sep,
                                          double cap,
                                          struct QdoptModel **out_model);

// # Safety
// `grid` must be a live handle and `out_model` writable.
enum QdoptStatus qdopt_model_harmonic(const struct QdoptGrid *grid,
                                      double mass,
                                      double omega,
                                      struct QdoptModel **out_model);

// # Safety
// `model` must be null or a handle not yet freed.
void qdopt_model_free(struct QdoptModel *model);

// Normalized Gaussian of width `alpha` centred on the origin.
//
// # Safety
// `grid` must be a live handle and `out_wf` writable.
enum QdoptStatus qdopt_wavefunction_gaussian(const struct QdoptGrid *grid,
                                             double alpha,
                                             struct QdoptWavefunction **out_wf);

// Number of amplitudes, or 0 for a null handle.
//
// # Safety
// `wf` must be null or a live handle.
size_t qdopt_wavefunction_len(const struct QdoptWavefunction *wf);

// Copies the amplitudes as interleaved `(re, im)` pairs; `len` counts doubles.
//
// # Safety
// `dst` must point to `len` writable doubles.
enum QdoptStatus qdopt_wavefunction_copy_amplitudes(const struct QdoptWavefunction *wf,
                                                    double *dst,
                                                    size_t len);

// Writes the state as a `WPK1` dump.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string.
enum QdoptStatus qdopt_wavefunction_write_dump(const struct QdoptWavefunction *wf,
                                               const char *path);

// Reads a `WPK1` dump.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string and `out_wf` writable.
enum QdoptStatus qdopt_wavefunction_read_dump(const char *path, struct QdoptWavefunction **out_wf);

// # Safety
// `wf` must be null or a handle not yet freed.
void qdopt_wavefunction_free(struct QdoptWavefunction *wf);

// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`.
//
// # Safety
// Handles must be live; `energy` writable.
enum QdoptStatus qdopt_energy(const struct QdoptWavefunction *wf,
                              const struct QdoptModel *model,
                              double *energy);

// Relaxes `wf` in place towards the ground state of `model`.
//
// # Safety
// Handles must be live; output pointers writable (any may be null to skip).
enum QdoptStatus qdopt_evolve(struct QdoptWavefunction *wf,
                              const struct QdoptModel *model,
                              double d_tau,
                              size_t max_steps,
                              double energy_tol,
                              size_t check_every,
                              double *energy_out,
                              size_t *steps_out,
                              int *converged_out);

// Applies `n_steps` plain Trotter steps with per-step renormalization.
//
// # Safety
// Handles must be live.
enum QdoptStatus qdopt_trotter_steps(struct QdoptWavefunction *wf,
                                     const struct QdoptModel *model,
                                     double d_tau,
                                     size_t n_steps);

// Mean, standard deviation and mode of `|R|` from a four-axis reduced state.
//
// # Safety
// `wf` must be live; outputs writable.
enum QdoptStatus qdopt_bond_stats(const struct QdoptWavefunction *wf,
                                  double *mean,
                                  double *std,
                                  double *mode);

// Draws `n_obs` bond lengths from the nuclear marginal of `wf`.
//
// # Safety
// `wf` must be live; `bond_lengths` must hold `n_obs` doubles.
enum QdoptStatus qdopt_sample_bond_lengths(const struct QdoptWavefunction *wf,
                                           size_t n_obs,
                                           uint64_t seed,
                                           double *bond_lengths);

// Lowest-mode zero-point width of a free-ended chain, exact and small-`n`.
//
// # Safety
// Outputs must be writable.
enum QdoptStatus qdopt_chain_sigma(size_t n_masses,
                                   double mass,
                                   double spring_k,
                                   double *exact,
                                   double *approx);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QDOPT_H */
