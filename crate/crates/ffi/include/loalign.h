#ifndef LOALIGN_H
#define LOALIGN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LoStatus {
  LO_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  LO_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  LO_STATUS_INVALID_UTF8 = 2,
  /**
   * File system failure.
   */
  LO_STATUS_IO = 3,
  /**
   * The catalog or another input could not be parsed.
   */
  LO_STATUS_INVALID_INPUT = 4,
  /**
   * The configuration was rejected.
   */
  LO_STATUS_INVALID_CONFIG = 5,
  /**
   * An analysis stage failed.
   */
  LO_STATUS_PIPELINE = 6,
  /**
   * A published run is missing, corrupt or of an unsupported version.
   */
  LO_STATUS_RUN_STORE = 7,
  /**
   * The requested subject, topic or outcome does not exist.
   */
  LO_STATUS_NOT_FOUND = 8,
  LO_STATUS_PANIC = 9,
} LoStatus;

/**
 * In-memory result of running the full pipeline over a catalog.
 */
typedef struct LoAnalysis LoAnalysis;

/**
 * Parsed curriculum catalog.
 */
typedef struct LoCatalog LoCatalog;

/**
 * A loaded, published run ready to answer API requests.
 */
typedef struct LoSnapshot LoSnapshot;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Owned by the
 * library; valid until the next call on this thread.
 */
const char *lo_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *lo_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void lo_string_free(char *s);

/**
 * Default pipeline configuration as JSON, with `seed` applied to both the
 * embedder and clustering. Edit and pass to [`lo_analysis_run`] or [`lo_publish`].
 *
 * # Safety
 * `out_json` must be a valid pointer.
 */
enum LoStatus lo_config_default(uint64_t seed, char **out_json);

/**
 * Parses a catalog CSV file with the default column names.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum LoStatus lo_catalog_load(const char *path, struct LoCatalog **out);

/**
 * Parses catalog CSV held in memory.
 *
 * # Safety
 * `data` must point to `len` readable bytes and `out` must be a valid pointer.
 */
enum LoStatus lo_catalog_parse(const uint8_t *data, size_t len, struct LoCatalog **out);

/**
 * Number of outcomes, or 0 for NULL.
 *
 * # Safety
 * `catalog` must be NULL or a live handle.
 */
size_t lo_catalog_len(const struct LoCatalog *catalog);

/**
 * Ordered outcome pairs considered by the matcher, n·(n−1).
 *
 * # Safety
 * `catalog` must be NULL or a live handle.
 */
uint64_t lo_catalog_pair_count(const struct LoCatalog *catalog);

/**
 * # Safety
 * `catalog` must be NULL or a live handle; it is invalid afterwards.
 */
void lo_catalog_free(struct LoCatalog *catalog);

/**
 * Runs embedding, topic fitting, analytics and validation in memory.
 * `config_json` may be NULL for the defaults. The catalog is not consumed.
 *
 * # Safety
 * `catalog` must be a live handle, `config_json` NULL or a NUL-terminated
 * string, `out` a valid pointer.
 */
enum LoStatus lo_analysis_run(const struct LoCatalog *catalog,
                              const char *config_json,
                              struct LoAnalysis **out);

/**
 * Number of topics found (outliers excluded).
 *
 * # Safety
 * `analysis` must be NULL or a live handle.
 */
size_t lo_analysis_topic_count(const struct LoAnalysis *analysis);

/**
 * Framework consistency at the standard level, in [0, 1].
 *
 * # Safety
 * `analysis` must be a live handle and `out` a valid pointer.
 */
enum LoStatus lo_analysis_consistency(const struct LoAnalysis *analysis, double *out);

/**
 * Directed subject-matrix cell as an exact ratio: `numerator` outcomes of
 * `subject_a` out of `denominator` have a match in `subject_b`.
 *
 * # Safety
 * `analysis` must be a live handle, the subjects NUL-terminated strings and
 * the outputs valid pointers.
 */
enum LoStatus lo_analysis_subject_cell(const struct LoAnalysis *analysis,
                                       const char *subject_a,
                                       const char *subject_b,
                                       uint32_t *numerator,
                                       uint32_t *denominator);

/**
 * Subject matrix (all outcomes) as CSV.
 *
 * # Safety
 * `analysis` must be a live handle and `out_csv` a valid pointer.
 */
enum LoStatus lo_analysis_matrix_csv(const struct LoAnalysis *analysis, char **out_csv);

/**
 * # Safety
 * `analysis` must be NULL or a live handle; it is invalid afterwards.
 */
void lo_analysis_free(struct LoAnalysis *analysis);

/**
 * Runs the pipeline and publishes an immutable run under `out_root`.
 * Writes the run directory path to `out_run_dir`. Publishing the same
 * inputs again returns the existing run.
 *
 * # Safety
 * `catalog` must be a live handle; `config_json` and `programs_toml` NULL or
 * NUL-terminated; `out_root` NUL-terminated; `out_run_dir` a valid pointer.
 */
enum LoStatus lo_publish(const struct LoCatalog *catalog,
                         const char *config_json,
                         const char *programs_toml,
                         const char *out_root,
                         char **out_run_dir);

/**
 * Loads and verifies a published run (its directory or `manifest.json`).
 *
 * # Safety
 * `path` must be NUL-terminated and `out` a valid pointer.
 */
enum LoStatus lo_snapshot_load(const char *path, struct LoSnapshot **out);

/**
 * Run id of a loaded snapshot.
 *
 * # Safety
 * `snapshot` must be a live handle and `out` a valid pointer.
 */
enum LoStatus lo_snapshot_run_id(const struct LoSnapshot *snapshot, char **out);

/**
 * Answers one API request, e.g. `GET /api/v1/heatmap?cycle=2`. The call
 * itself succeeds whenever the request could be answered; `out_status`
 * carries the HTTP status and `out_body` the JSON document.
 *
 * # Safety
 * `snapshot` must be a live handle, `method` and `target` NUL-terminated,
 * the outputs valid pointers.
 */
enum LoStatus lo_snapshot_request(const struct LoSnapshot *snapshot,
                                  const char *method,
                                  const char *target,
                                  uint16_t *out_status,
                                  char **out_body);

/**
 * Writes the static dashboard bundle into `dir`.
 *
 * # Safety
 * `snapshot` must be a live handle and `dir` NUL-terminated.
 */
enum LoStatus lo_snapshot_export(const struct LoSnapshot *snapshot, const char *dir);

/**
 * # Safety
 * `snapshot` must be NULL or a live handle; it is invalid afterwards.
 */
void lo_snapshot_free(struct LoSnapshot *snapshot);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOALIGN_H */
