#ifndef TRAJCURATE_H
#define TRAJCURATE_H

/* Generated by cbindgen; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum TcStatus {
  TC_STATUS_OK = 0,
  TC_STATUS_NULL_POINTER = 1,
  TC_STATUS_INVALID_ARGUMENT = 2,
  TC_STATUS_PARSE = 3,
  TC_STATUS_IO = 4,
  TC_STATUS_DEGENERATE = 5,
  TC_STATUS_ROTATION_ONLY_INPUT = 6,
  TC_STATUS_MIXED_MOTION_KINDS = 7,
  TC_STATUS_OUT_OF_RANGE = 8,
  TC_STATUS_PANIC = 99,
} TcStatus;

typedef enum TcDecision {
  TC_DECISION_KEEP = 0,
  TC_DECISION_REJECT_JUMP = 1,
  TC_DECISION_REJECT_COMPLEX = 2,
  TC_DECISION_REJECT_STATIC = 3,
  TC_DECISION_ROTATION_ONLY_KEEP = 4,
} TcDecision;

/**
 * Opaque template library with a prepared classifier.
 */
typedef struct TcLibrary TcLibrary;

/**
 * Opaque trajectory.
 */
typedef struct TcTrajectory TcTrajectory;

typedef struct TcFilterThresholds {
  double tau_jump;
  double tau_complex;
  double epsilon;
  double tau_static_trans;
  double tau_static_rot;
} TcFilterThresholds;

/**
 * Ratios are NaN when the filter did not compute them (rotation-only or
 * static clips).
 */
typedef struct TcFilterVerdict {
  enum TcDecision decision;
  double r_jump;
  double r_complex;
  double total_trans;
  double total_rot;
} TcFilterVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *tc_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tc_version(void);

struct TcFilterThresholds tc_filter_thresholds_default(void);

/**
 * Loads a pose file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum TcStatus tc_trajectory_load(const char *path, struct TcTrajectory **out);

/**
 * Parses pose-file text.
 *
 * # Safety
 * `id` and `text` must be NUL-terminated strings; `out` must be writable.
 */
enum TcStatus tc_trajectory_parse(const char *id, const char *text, struct TcTrajectory **out);

/**
 * Builds a trajectory from `n` frame indices, `3n` center coordinates and
 * `4n` quaternion components (x, y, z, w per pose).
 *
 * # Safety
 * The arrays must hold the stated number of elements; `id` must be a
 * NUL-terminated string; `out` must be writable.
 */
enum TcStatus tc_trajectory_from_arrays(const char *id,
                                        size_t n,
                                        const uint64_t *frames,
                                        const double *centers,
                                        const double *quats,
                                        struct TcTrajectory **out);

/**
 * # Safety
 * `t` must be null or a handle from this library, not yet freed.
 */
void tc_trajectory_free(struct TcTrajectory *t);

/**
 * Number of poses; 0 for a null handle.
 *
 * # Safety
 * `t` must be null or a live handle.
 */
size_t tc_trajectory_len(const struct TcTrajectory *t);

/**
 * Copies pose `i`: frame index, center (3 values) and quaternion (x, y, z, w).
 *
 * # Safety
 * `t` must be a live handle; `frame`, `center` and `quat` must be writable
 * for 1, 3 and 4 elements.
 */
enum TcStatus tc_trajectory_pose(const struct TcTrajectory *t,
                                 size_t i,
                                 uint64_t *frame,
                                 double *center,
                                 double *quat);

/**
 * # Safety
 * `t` must be a live handle; `path` a NUL-terminated string.
 */
enum TcStatus tc_trajectory_write(const struct TcTrajectory *t, const char *path);

/**
 * Smoothness filter verdict.
 *
 * # Safety
 * `t` must be a live handle; `th` readable; `out` writable.
 */
enum TcStatus tc_filter(const struct TcTrajectory *t,
                        const struct TcFilterThresholds *th,
                        struct TcFilterVerdict *out);

/**
 * TransErr and RotErr of `est` against `reference` with default pair
 * settings. With `rotation_only` nonzero, translation is ignored and
 * `trans_err` is 0.
 *
 * # Safety
 * Handles must be live; outputs writable.
 */
enum TcStatus tc_pair_errors(const struct TcTrajectory *est,
                             const struct TcTrajectory *reference,
                             bool rotation_only,
                             double *trans_err,
                             double *rot_err);

/**
 * Least-squares similarity taking `src` onto `dst` (`n` points each, xyz
 * interleaved). Writes the scale, a row-major 3×3 rotation and the
 * translation.
 *
 * # Safety
 * `src` and `dst` must hold `3n` values; `rotation` 9 and `translation` 3
 * writable values.
 */
enum TcStatus tc_estimate_similarity(const double *src,
                                     const double *dst,
                                     size_t n,
                                     double *scale,
                                     double *rotation,
                                     double *translation);

/**
 * The 50 canonical templates at default magnitudes, ready to classify with
 * the given rotation weight.
 *
 * # Safety
 * `out` must be writable.
 */
enum TcStatus tc_library_new(double rot_weight, struct TcLibrary **out);

/**
 * # Safety
 * `lib` must be null or a live handle.
 */
void tc_library_free(struct TcLibrary *lib);

/**
 * Number of classes; 0 for a null handle.
 *
 * # Safety
 * `lib` must be null or a live handle.
 */
size_t tc_library_len(const struct TcLibrary *lib);

/**
 * Class name owned by the library, or null when out of range.
 *
 * # Safety
 * `lib` must be null or a live handle.
 */
const char *tc_library_class_name(const struct TcLibrary *lib, size_t class_id);

/**
 * Nearest template class of `t`.
 *
 * # Safety
 * Handles must be live; outputs writable.
 */
enum TcStatus tc_classify(const struct TcLibrary *lib,
                          const struct TcTrajectory *t,
                          size_t *class_id,
                          double *score);

/**
 * Symmetric match test. `accepted` is set to whether both errors are within
 * the thresholds; the errors are written either way.
 *
 * # Safety
 * Handles must be live; outputs writable.
 */
enum TcStatus tc_match_pair(const struct TcTrajectory *a,
                            const struct TcTrajectory *b,
                            double max_trans_err,
                            double max_rot_err,
                            bool *accepted,
                            double *trans_err,
                            double *rot_err);

/**
 * Dual-condition guidance over vectors of length `n`; writes `n` values.
 *
 * # Safety
 * Each input must hold `n` values and `out` must be writable for `n`.
 */
enum TcStatus tc_compose_cfg(size_t n,
                             const double *eps_uncond,
                             const double *eps_text,
                             const double *eps_full,
                             double w_t,
                             double w_m,
                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRAJCURATE_H */
