#ifndef MARKETGEN_H
#define MARKETGEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum MgStatus {
  MG_STATUS_OK = 0,
  MG_STATUS_NULL_POINTER = 1,
  MG_STATUS_INVALID_ARGUMENT = 2,
  MG_STATUS_INVALID_PARAMS = 3,
  MG_STATUS_PLANNING_FAILED = 4,
  MG_STATUS_GENERATION_FAILED = 5,
  MG_STATUS_SAMPLING_FAILED = 6,
  MG_STATUS_PARSE_ERROR = 7,
  MG_STATUS_HASH_MISMATCH = 8,
  MG_STATUS_NOT_APPLICABLE = 9,
  MG_STATUS_REMOTE = 10,
  MG_STATUS_IO = 11,
  MG_STATUS_NO_PATH = 12,
  MG_STATUS_PANIC = 13,
} MgStatus;

typedef enum MgTrack {
  MG_TRACK_IN_AISLE_COLLECTION = 0,
  MG_TRACK_CHECKOUT_UNLOADING = 1,
} MgTrack;

typedef struct MgCatalog MgCatalog;

typedef struct MgEpisodes MgEpisodes;

typedef struct MgGrid MgGrid;

typedef struct MgReport MgReport;

typedef struct MgScene MgScene;

typedef struct MgRobot {
  double radius;
  double reach;
} MgRobot;

/**
 * Agent settings; `p_skip` and `detour` apply to the noisy agent only.
 */
typedef struct MgAgent {
  bool noisy;
  double p_skip;
  double detour;
  uint64_t seed;
} MgAgent;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next library call on the same thread.
 */
const char *mg_last_error(void);

/**
 * Releases a string returned by the library.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void mg_string_free(char *s);

struct MgRobot mg_robot_default(void);

double mg_default_cell_size(void);

/**
 * # Safety
 * `out_catalog` must be a valid handle slot.
 */
enum MgStatus mg_catalog_synth(uint64_t seed,
                               size_t goods,
                               size_t facilities,
                               struct MgCatalog **out_catalog);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out_catalog` a valid handle slot.
 */
enum MgStatus mg_catalog_load(const char *path, struct MgCatalog **out_catalog);

/**
 * # Safety
 * Handles must be live; `path` must be a NUL-terminated string.
 */
enum MgStatus mg_catalog_save(const struct MgCatalog *catalog, const char *path);

/**
 * # Safety
 * `catalog` must be null or a live handle.
 */
size_t mg_catalog_goods_count(const struct MgCatalog *catalog);

/**
 * # Safety
 * `catalog` must be null or a handle not yet freed.
 */
void mg_catalog_free(struct MgCatalog *catalog);

/**
 * Generates one scene. `spec_json` is a store spec document, or null for
 * the built-in store; its seed is replaced by `seed`.
 *
 * # Safety
 * `spec_json` must be null or NUL-terminated; handles must be live.
 */
enum MgStatus mg_scene_generate(const char *spec_json,
                                const struct MgCatalog *catalog,
                                uint64_t seed,
                                struct MgScene **out_scene);

/**
 * # Safety
 * `path` must be NUL-terminated and `out_scene` a valid handle slot.
 */
enum MgStatus mg_scene_load(const char *path, struct MgScene **out_scene);

/**
 * # Safety
 * Handles must be live; `path` must be NUL-terminated.
 */
enum MgStatus mg_scene_save(const struct MgScene *scene, const char *path);

/**
 * Canonical JSON of the scene; free with [`mg_string_free`].
 *
 * # Safety
 * `scene` must be live and `out_json` a valid pointer.
 */
enum MgStatus mg_scene_to_json(const struct MgScene *scene, char **out_json);

/**
 * Content hash of the scene as lowercase hex; free with [`mg_string_free`].
 *
 * # Safety
 * `scene` must be live and `out_hash` a valid pointer.
 */
enum MgStatus mg_scene_hash(const struct MgScene *scene, char **out_hash);

/**
 * Top-down SVG drawing; free with [`mg_string_free`].
 *
 * # Safety
 * `scene` must be live, `grid` null or live, `out_svg` a valid pointer.
 */
enum MgStatus mg_scene_render_svg(const struct MgScene *scene,
                                  bool show_products,
                                  const struct MgGrid *grid,
                                  char **out_svg);

/**
 * # Safety
 * `scene` must be null or live.
 */
size_t mg_scene_product_count(const struct MgScene *scene);

/**
 * # Safety
 * `scene` must be null or live.
 */
size_t mg_scene_facility_count(const struct MgScene *scene);

/**
 * # Safety
 * `scene` must be null or a handle not yet freed.
 */
void mg_scene_free(struct MgScene *scene);

/**
 * # Safety
 * `scene` must be live and `out_grid` a valid handle slot.
 */
enum MgStatus mg_grid_rasterize(const struct MgScene *scene,
                                double cell_size,
                                double robot_radius,
                                struct MgGrid **out_grid);

/**
 * # Safety
 * `grid` must be null or live.
 */
uint32_t mg_grid_width(const struct MgGrid *grid);

/**
 * # Safety
 * `grid` must be null or live.
 */
uint32_t mg_grid_height(const struct MgGrid *grid);

/**
 * True for occupied cells, cells outside the grid, and a null grid.
 *
 * # Safety
 * `grid` must be null or live.
 */
bool mg_grid_occupied(const struct MgGrid *grid, uint32_t x, uint32_t y);

/**
 * Shortest path length in meters between two cells.
 * Returns `NoPath` when the goal is unreachable.
 *
 * # Safety
 * `grid` must be live and `out_length` a valid pointer.
 */
enum MgStatus mg_grid_path_length(const struct MgGrid *grid,
                                  uint32_t sx,
                                  uint32_t sy,
                                  uint32_t gx,
                                  uint32_t gy,
                                  double *out_length);

/**
 * Writes the grid as binary PGM with a JSON sidecar beside it.
 *
 * # Safety
 * `grid` must be live and `path` NUL-terminated.
 */
enum MgStatus mg_grid_write_pgm(const struct MgGrid *grid, const char *path);

/**
 * # Safety
 * `grid` must be null or a handle not yet freed.
 */
void mg_grid_free(struct MgGrid *grid);

/**
 * Samples `count` episodes of one track in one scene. The grid must have
 * been rasterized from the same scene with `robot.radius`.
 *
 * # Safety
 * Handles must be live and `out_episodes` a valid handle slot.
 */
enum MgStatus mg_episodes_sample(const struct MgScene *scene,
                                 const struct MgGrid *grid,
                                 enum MgTrack track,
                                 size_t count,
                                 uint64_t seed,
                                 struct MgRobot robot,
                                 struct MgEpisodes **out_episodes);

/**
 * # Safety
 * `episodes` must be null or live.
 */
size_t mg_episodes_count(const struct MgEpisodes *episodes);

/**
 * Episodes as JSON lines; free with [`mg_string_free`].
 *
 * # Safety
 * `episodes` must be live and `out_jsonl` a valid pointer.
 */
enum MgStatus mg_episodes_to_jsonl(const struct MgEpisodes *episodes, char **out_jsonl);

/**
 * # Safety
 * `episodes` must be live and `path` NUL-terminated.
 */
enum MgStatus mg_episodes_save(const struct MgEpisodes *episodes, const char *path);

/**
 * # Safety
 * `episodes` must be null or a handle not yet freed.
 */
void mg_episodes_free(struct MgEpisodes *episodes);

/**
 * Runs an agent on episodes sampled in `scene` and builds a report.
 * Fails with `HashMismatch` if the episodes name a different scene.
 *
 * # Safety
 * Handles must be live and `out_report` a valid handle slot.
 */
enum MgStatus mg_evaluate(const struct MgScene *scene,
                          const struct MgGrid *grid,
                          const struct MgEpisodes *episodes,
                          struct MgAgent agent,
                          struct MgRobot robot,
                          struct MgReport **out_report);

/**
 * The full benchmark run for `seed`, with its artifacts written to `out_dir`.
 *
 * # Safety
 * `out_dir` must be NUL-terminated and `out_report` a valid handle slot.
 */
enum MgStatus mg_reproduce_bench(uint64_t seed,
                                 const char *out_dir,
                                 struct MgAgent agent,
                                 struct MgReport **out_report);

/**
 * Success rate over one track's episodes.
 *
 * # Safety
 * `report` must be live and `out_sr` a valid pointer.
 */
enum MgStatus mg_report_sr(const struct MgReport *report, enum MgTrack track, double *out_sr);

/**
 * Success weighted by path length; `NotApplicable` on the checkout track.
 *
 * # Safety
 * `report` must be live and `out_spl` a valid pointer.
 */
enum MgStatus mg_report_spl(const struct MgReport *report, enum MgTrack track, double *out_spl);

/**
 * Canonical JSON of the report; free with [`mg_string_free`].
 *
 * # Safety
 * `report` must be live and `out_json` a valid pointer.
 */
enum MgStatus mg_report_to_json(const struct MgReport *report, char **out_json);

/**
 * # Safety
 * `report` must be null or a handle not yet freed.
 */
void mg_report_free(struct MgReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MARKETGEN_H */
