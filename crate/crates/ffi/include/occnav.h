#ifndef OCCNAV_H
#define OCCNAV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum OccnavNavMethod {
  OCCNAV_NAV_METHOD_NORMAL = 0,
  OCCNAV_NAV_METHOD_GROUND_TRUTH = 1,
  OCCNAV_NAV_METHOD_PREDICTED = 2,
} OccnavNavMethod;

typedef enum OccnavStatus {
  OCCNAV_STATUS_OK = 0,
  OCCNAV_STATUS_NULL_POINTER = 1,
  OCCNAV_STATUS_INVALID_ARGUMENT = 2,
  OCCNAV_STATUS_CONFIG = 3,
  OCCNAV_STATUS_IO = 4,
  OCCNAV_STATUS_FORMAT = 5,
  OCCNAV_STATUS_SHAPE_MISMATCH = 6,
  OCCNAV_STATUS_NUMERIC = 7,
  OCCNAV_STATUS_POSE_IN_SOLID = 8,
  OCCNAV_STATUS_WORLD_GENERATION = 9,
  OCCNAV_STATUS_BUFFER_TOO_SMALL = 10,
  OCCNAV_STATUS_PANIC = 11,
} OccnavStatus;

/**
 * Run configuration handle.
 */
typedef struct OccnavConfig OccnavConfig;

/**
 * Trained generator handle.
 */
typedef struct OccnavModel OccnavModel;

/**
 * Generated room handle.
 */
typedef struct OccnavWorld OccnavWorld;

/**
 * Aggregate of one navigation suite.
 */
typedef struct OccnavSuiteSummary {
  size_t episodes;
  double spd;
  double success_rate;
} OccnavSuiteSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *occnav_version(void);

/**
 * Bytes needed for the last error message, including the NUL.
 */
size_t occnav_last_error_length(void);

/**
 * Copy the calling thread's last error message into `buf`. The message is
 * empty after a successful call.
 *
 * # Safety
 * `buf` must point to `len` writable bytes.
 */
enum OccnavStatus occnav_last_error_message(char *buf, size_t len);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum OccnavStatus occnav_config_default(struct OccnavConfig **out);

/**
 * Parse a TOML run configuration.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid handle slot.
 */
enum OccnavStatus occnav_config_from_toml(const char *text, struct OccnavConfig **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid handle slot.
 */
enum OccnavStatus occnav_config_load(const char *path, struct OccnavConfig **out);

/**
 * Sixteen hex digits identifying the configuration; `len` must be at
 * least 17.
 *
 * # Safety
 * `cfg` must be a live handle and `buf` point to `len` writable bytes.
 */
enum OccnavStatus occnav_config_hash(const struct OccnavConfig *cfg, char *buf, size_t len);

/**
 * Cells per side of the local grid.
 *
 * # Safety
 * `cfg` must be a live handle and `out` valid.
 */
enum OccnavStatus occnav_config_grid_resolution(const struct OccnavConfig *cfg, size_t *out);

/**
 * # Safety
 * `cfg` must be null or a handle from this library, freed at most once.
 */
void occnav_config_free(struct OccnavConfig *cfg);

/**
 * Generate the room with the given world id from the config's template.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid handle slot.
 */
enum OccnavStatus occnav_world_generate(const struct OccnavConfig *cfg,
                                        uint64_t id,
                                        struct OccnavWorld **out);

/**
 * Interior width and height in meters.
 *
 * # Safety
 * `world` must be a live handle; both out pointers valid.
 */
enum OccnavStatus occnav_world_size(const struct OccnavWorld *world, double *width, double *height);

/**
 * Whether a point lies inside the room and outside every obstacle.
 *
 * # Safety
 * `world` must be a live handle and `out` valid.
 */
enum OccnavStatus occnav_world_is_free(const struct OccnavWorld *world,
                                       double x,
                                       double y,
                                       bool *out);

/**
 * # Safety
 * `world` must be null or a handle from this library, freed at most once.
 */
void occnav_world_free(struct OccnavWorld *world);

/**
 * Sense from a robot pose: `input` receives the center-camera probability
 * grid and `target` the three-camera fusion, both row-major with `len`
 * equal to resolution squared.
 *
 * # Safety
 * Handles must be live; `input` and `target` must each hold `len` floats.
 */
enum OccnavStatus occnav_observe(const struct OccnavConfig *cfg,
                                 const struct OccnavWorld *world,
                                 double x,
                                 double y,
                                 double yaw,
                                 float *input,
                                 float *target,
                                 size_t len);

/**
 * Load generator weights; the architecture must match the config.
 *
 * # Safety
 * `cfg` must be a live handle, `path` NUL-terminated, `out` a valid slot.
 */
enum OccnavStatus occnav_model_load(const struct OccnavConfig *cfg,
                                    const char *path,
                                    struct OccnavModel **out);

/**
 * # Safety
 * `model` must be null or a handle from this library, freed at most once.
 */
void occnav_model_free(struct OccnavModel *model);

/**
 * Predict a full map from a partial one. Known input cells are copied to
 * the output unchanged.
 *
 * # Safety
 * Handles must be live; `input` and `output` must each hold `len` floats.
 */
enum OccnavStatus occnav_predict_inpaint(const struct OccnavModel *model,
                                         const struct OccnavConfig *cfg,
                                         const float *input,
                                         float *output,
                                         size_t len);

/**
 * Agreement of free/occupied labels over jointly known cells, in [0, 1].
 * `defined` is false, and `out` untouched, when no cell is known in both.
 *
 * # Safety
 * `cfg` must be live; the grids must hold `len` floats; out pointers valid.
 */
enum OccnavStatus occnav_inpaint_accuracy(const struct OccnavConfig *cfg,
                                          const float *pred,
                                          const float *target,
                                          size_t len,
                                          double *out,
                                          bool *defined);

/**
 * Percentage of cells unknown in `input` and known in `pred`, relative to
 * the known input cells. `defined` is false without known input cells.
 *
 * # Safety
 * `cfg` must be live; the grids must hold `len` floats; out pointers valid.
 */
enum OccnavStatus occnav_inpainted_fraction(const struct OccnavConfig *cfg,
                                            const float *input,
                                            const float *pred,
                                            size_t len,
                                            double *out,
                                            bool *defined);

/**
 * Run `episodes` seeded navigation episodes over the config's test worlds.
 * `method` is an `OccnavNavMethod` value. `model` is required for
 * `OCCNAV_NAV_METHOD_PREDICTED` and must be null otherwise.
 *
 * # Safety
 * `cfg` must be live, `model` null or live, `out` valid.
 */
enum OccnavStatus occnav_simulate(const struct OccnavConfig *cfg,
                                  uint32_t method,
                                  const struct OccnavModel *model,
                                  size_t episodes,
                                  struct OccnavSuiteSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OCCNAV_H */
