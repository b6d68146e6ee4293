#ifndef CBET_H
#define CBET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CbetStatus {
  CBET_STATUS_OK = 0,
  CBET_STATUS_NULL_POINTER = 1,
  CBET_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Call made in the wrong state, e.g. stepping a finished episode.
   */
  CBET_STATUS_USAGE = 3,
  /**
   * A panic was caught at the boundary.
   */
  CBET_STATUS_INTERNAL = 4,
} CbetStatus;

typedef enum CbetEnvKind {
  CBET_ENV_KIND_DOORKEY = 0,
  CBET_ENV_KIND_UNLOCK = 1,
  CBET_ENV_KIND_CRAFTWORLD = 2,
} CbetEnvKind;

/**
 * Opaque pseudocount tables.
 */
typedef struct CbetCountStore CbetCountStore;

/**
 * Opaque environment with its last observation.
 */
typedef struct CbetEnv CbetEnv;

/**
 * Result of one environment step, with the novelty keys of the transition.
 */
typedef struct CbetStep {
  double reward;
  bool done;
  bool success;
  uint64_t state_key;
  uint64_t change_key;
} CbetStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *cbet_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL
 * terminated) and returns the message length without the terminator. A
 * return value `>= len` means the message was truncated. Returns 0 when
 * there is no message.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t cbet_last_error_message(char *buf, size_t len);

/**
 * Creates a count store. `reset_probability` must not exceed
 * `1 - gamma_i`; resets draw from a stream derived from `seed`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle pointer.
 */
enum CbetStatus cbet_count_store_new(double gamma_i,
                                     double reset_probability,
                                     uint64_t seed,
                                     struct CbetCountStore **out);

/**
 * # Safety
 * `store` must be null or a handle from [`cbet_count_store_new`] not yet freed.
 */
void cbet_count_store_free(struct CbetCountStore *store);

/**
 * Counts one visit of `(state_key, change_key)` and writes the intrinsic
 * reward `1 / (n(s) + n(c))`.
 *
 * # Safety
 * `store` must be a live handle and `reward` a valid pointer.
 */
enum CbetStatus cbet_count_store_observe(struct CbetCountStore *store,
                                         uint64_t state_key,
                                         uint64_t change_key,
                                         double *reward);

/**
 * Draws the per-step reset; `*reset` is set when both tables were cleared.
 *
 * # Safety
 * `store` must be a live handle and `reset` a valid pointer.
 */
enum CbetStatus cbet_count_store_maybe_reset(struct CbetCountStore *store, bool *reset);

/**
 * Current counts of one state key and one change key.
 *
 * # Safety
 * `store` must be a live handle; `state_count` and `change_count` valid pointers.
 */
enum CbetStatus cbet_count_store_counts(const struct CbetCountStore *store,
                                        uint64_t state_key,
                                        uint64_t change_key,
                                        uint64_t *state_count,
                                        uint64_t *change_count);

/**
 * `r_e + alpha * r_i`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CbetStatus cbet_mix(double r_e, double r_i, double alpha, double *out);

/**
 * Writes `softmax(scale * (intrinsic + extrinsic))` over `n` actions to `out`.
 *
 * # Safety
 * `intrinsic`, `extrinsic` and `out` must each point to `n` valid `f64`s.
 */
enum CbetStatus cbet_combine_logits(const double *intrinsic,
                                    const double *extrinsic,
                                    size_t n,
                                    double scale,
                                    double *out);

/**
 * Creates an environment. `kind` takes the values of `CbetEnvKind`;
 * other values are rejected.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum CbetStatus cbet_env_new(int32_t kind,
                             uint64_t layout_seed,
                             bool fixed_layout,
                             struct CbetEnv **out);

/**
 * # Safety
 * `env` must be null or a handle from [`cbet_env_new`] not yet freed.
 */
void cbet_env_free(struct CbetEnv *env);

/**
 * Starts an episode and writes the initial observation's state key.
 *
 * # Safety
 * `env` must be a live handle and `state_key` a valid pointer.
 */
enum CbetStatus cbet_env_reset(struct CbetEnv *env, uint64_t episode_seed, uint64_t *state_key);

/**
 * Applies action `action` (0 turn left, 1 turn right, 2 forward, 3 pickup,
 * 4 toggle, 5 craft, 6 noop).
 *
 * # Safety
 * `env` must be a live handle and `out` a valid pointer.
 */
enum CbetStatus cbet_env_step(struct CbetEnv *env, uint32_t action, struct CbetStep *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CBET_H */
