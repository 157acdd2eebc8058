#ifndef WULFFMC_H
#define WULFFMC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WulffmcStatus {
  WULFFMC_STATUS_OK = 0,
  WULFFMC_STATUS_NULL_POINTER = 1,
  WULFFMC_STATUS_INVALID_ARGUMENT = 2,
  /**
   * A pair distance inside the hard core.
   */
  WULFFMC_STATUS_HARD_CORE = 3,
  WULFFMC_STATUS_GEOMETRY = 4,
  WULFFMC_STATUS_SAMPLER = 5,
  WULFFMC_STATUS_PANIC = 6,
} WulffmcStatus;

/**
 * Immutable container shape, canonical with volume 10.
 */
typedef struct WulffmcShape WulffmcShape;

/**
 * One Markov chain with its ensemble parameters.
 */
typedef struct WulffmcSimulation WulffmcSimulation;

/**
 * Means and block standard errors from [`wulffmc_simulation_run`].
 */
typedef struct WulffmcEstimate {
  double total_energy;
  double total_energy_se;
  double potential_energy;
  double potential_energy_se;
  double volume;
  double volume_se;
  double displacement_acceptance;
  double volume_acceptance;
} WulffmcEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *wulffmc_version(void);

/**
 * Message of the last failed call on this thread, or an empty string. The
 * pointer stays valid until the next call on this thread.
 */
const char *wulffmc_last_error(void);

/**
 * Pair energy at distance `r`; `WULFFMC_STATUS_HARD_CORE` for `r < 1`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `double`.
 */
enum WulffmcStatus wulffmc_pair_energy(double r, double *out);

/**
 * Energy per particle of the infinite triangular lattice with `spacing`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one `double`.
 */
enum WulffmcStatus wulffmc_lattice_energy(double spacing, double *out);

/**
 * Disk (`dimension == 2`) or sphere (`dimension == 3`).
 *
 * # Safety
 * `out` must be null or point to writable memory for one pointer.
 */
enum WulffmcStatus wulffmc_shape_ball(uint32_t dimension_, struct WulffmcShape **out);

/**
 * Regular polygon with `sides >= 3`.
 *
 * # Safety
 * `out` must be null or point to writable memory for one pointer.
 */
enum WulffmcStatus wulffmc_shape_regular_polygon(uint32_t sides, struct WulffmcShape **out);

/**
 * # Safety
 * `out` must be null or point to writable memory for one pointer.
 */
enum WulffmcStatus wulffmc_shape_cuboctahedron(struct WulffmcShape **out);

/**
 * Shape from its JSON record, as written in `best_shape.json`.
 *
 * # Safety
 * `json` must be null or a NUL-terminated string; `out` must be null or
 * point to writable memory for one pointer.
 */
enum WulffmcStatus wulffmc_shape_from_json(const char *json, struct WulffmcShape **out);

/**
 * # Safety
 * `shape` must be a live handle; `out` must be null or writable.
 */
enum WulffmcStatus wulffmc_shape_dimension(const struct WulffmcShape *shape, uint32_t *out);

/**
 * # Safety
 * `shape` must be a live handle; `out` must be null or writable.
 */
enum WulffmcStatus wulffmc_shape_volume(const struct WulffmcShape *shape, double *out);

/**
 * Radial function along `(x, y, z)`, normalized internally. Planar shapes
 * ignore `z`.
 *
 * # Safety
 * `shape` must be a live handle; `out` must be null or writable.
 */
enum WulffmcStatus wulffmc_shape_radius(const struct WulffmcShape *shape,
                                        double x,
                                        double y,
                                        double z,
                                        double *out);

/**
 * Releases a shape. Simulations built from it keep their own reference.
 *
 * # Safety
 * `shape` must be null or a handle not yet freed.
 */
void wulffmc_shape_free(struct WulffmcShape *shape);

/**
 * New chain by random insertion. `volume_cap <= 0` means no cap, which
 * requires `pressure > 0`. A nonzero `ideal` disables the interaction.
 *
 * # Safety
 * `shape` must be a live handle; `out` must be null or writable.
 */
enum WulffmcStatus wulffmc_simulation_new(const struct WulffmcShape *shape,
                                          size_t particles,
                                          double beta,
                                          double pressure,
                                          double volume_cap,
                                          int32_t ideal,
                                          uint64_t seed,
                                          struct WulffmcSimulation **out);

/**
 * Runs `count` plain sweeps with the current step sizes.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum WulffmcStatus wulffmc_simulation_sweeps(struct WulffmcSimulation *sim, uint64_t count);

/**
 * Burn-in with step tuning, then `sweeps` measured sweeps sampled every
 * `thin` sweeps and split into `blocks` blocks.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be null or writable.
 */
enum WulffmcStatus wulffmc_simulation_run(struct WulffmcSimulation *sim,
                                          uint64_t burn_in,
                                          uint64_t sweeps,
                                          uint64_t thin,
                                          size_t blocks,
                                          struct WulffmcEstimate *out);

/**
 * Cached potential energy of the current state.
 *
 * # Safety
 * `sim` must be a live handle; `out` must be null or writable.
 */
enum WulffmcStatus wulffmc_simulation_energy(const struct WulffmcSimulation *sim, double *out);

/**
 * # Safety
 * `sim` must be a live handle; `out` must be null or writable.
 */
enum WulffmcStatus wulffmc_simulation_volume(const struct WulffmcSimulation *sim, double *out);

/**
 * Copies positions as `x y z` triples into `buffer`, which holds `len`
 * doubles and must fit `3 * N`. `written` receives the particle count.
 *
 * # Safety
 * `sim` must be a live handle; `buffer` must hold `len` doubles.
 */
enum WulffmcStatus wulffmc_simulation_positions(const struct WulffmcSimulation *sim,
                                                double *buffer,
                                                size_t len,
                                                size_t *written);

/**
 * # Safety
 * `sim` must be null or a handle not yet freed.
 */
void wulffmc_simulation_free(struct WulffmcSimulation *sim);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WULFFMC_H */
