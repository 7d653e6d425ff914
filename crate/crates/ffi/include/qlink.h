#ifndef QLINK_H
#define QLINK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum QlinkStatus {
  QLINK_STATUS_OK = 0,
  QLINK_STATUS_NULL_POINTER = 1,
  QLINK_STATUS_INVALID_UTF8 = 2,
  QLINK_STATUS_VALIDATION = 3,
  QLINK_STATUS_PARSE = 4,
  QLINK_STATUS_UNKNOWN_PRESET = 5,
  QLINK_STATUS_UNKNOWN_FIGURE = 6,
  QLINK_STATUS_DOMAIN = 7,
  QLINK_STATUS_IO = 8,
  QLINK_STATUS_OUT_OF_RANGE = 9,
  QLINK_STATUS_PANIC = 10,
} QlinkStatus;

/**
 * Opaque scenario handle.
 */
typedef struct QlinkScenario QlinkScenario;

/**
 * Opaque result-table handle.
 */
typedef struct QlinkTable QlinkTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf`.
 *
 * Returns the buffer size needed for the whole message including the NUL.
 *
 * # Safety
 * `buf` must be NULL or point to at least `len` writable bytes.
 */
size_t qlink_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qlink_version(void);

/**
 * Creates a scenario from a bundled preset.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum QlinkStatus qlink_scenario_from_preset(const char *name, struct QlinkScenario **out);

/**
 * Creates a scenario from the text of a scenario file.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum QlinkStatus qlink_scenario_from_str(const char *text, struct QlinkScenario **out);

/**
 * Creates a scenario from a file on disk.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be a valid pointer.
 */
enum QlinkStatus qlink_scenario_from_file(const char *path, struct QlinkScenario **out);

/**
 * Overrides one key. On failure the scenario is left unchanged.
 *
 * # Safety
 * `scenario` must be a live handle; `key` and `value` NUL-terminated strings.
 */
enum QlinkStatus qlink_scenario_set(struct QlinkScenario *scenario,
                                    const char *key,
                                    const char *value);

/**
 * Evaluates the scenario's sweep into a new table.
 *
 * # Safety
 * `scenario` must be a live handle; `out` a valid pointer.
 */
enum QlinkStatus qlink_scenario_run(const struct QlinkScenario *scenario, struct QlinkTable **out);

/**
 * Runs the bundled preset behind a figure id (`fig3a` .. `fig6b`).
 *
 * # Safety
 * `figure` must be a NUL-terminated string; `out` a valid pointer.
 */
enum QlinkStatus qlink_reproduce(const char *figure, struct QlinkTable **out);

/**
 * # Safety
 * `scenario` must be NULL or a handle not yet freed.
 */
void qlink_scenario_free(struct QlinkScenario *scenario);

/**
 * # Safety
 * `table` must be NULL or a handle not yet freed.
 */
void qlink_table_free(struct QlinkTable *table);

/**
 * Number of data rows; 0 for NULL.
 *
 * # Safety
 * `table` must be NULL or a live handle.
 */
size_t qlink_table_rows(const struct QlinkTable *table);

/**
 * Number of columns; 0 for NULL.
 *
 * # Safety
 * `table` must be NULL or a live handle.
 */
size_t qlink_table_columns(const struct QlinkTable *table);

/**
 * Reads one cell. "No key" and degenerate cells read as NaN.
 *
 * # Safety
 * `table` must be a live handle; `out` a valid pointer.
 */
enum QlinkStatus qlink_table_value(const struct QlinkTable *table,
                                   size_t row,
                                   size_t column,
                                   double *out);

/**
 * Copies a column name; returns the size needed, or 0 when out of range.
 *
 * # Safety
 * `table` must be a live handle; `buf` NULL or `len` writable bytes.
 */
size_t qlink_table_column_name(const struct QlinkTable *table,
                               size_t column,
                               char *buf,
                               size_t len);

/**
 * Copies a column's unit; returns the size needed, or 0 when out of range.
 *
 * # Safety
 * As [`qlink_table_column_name`].
 */
size_t qlink_table_column_unit(const struct QlinkTable *table,
                               size_t column,
                               char *buf,
                               size_t len);

/**
 * Serializes the table as CSV; returns the size needed, or 0 for NULL.
 *
 * # Safety
 * `table` must be NULL or a live handle; `buf` NULL or `len` writable bytes.
 */
size_t qlink_table_to_csv(const struct QlinkTable *table, char *buf, size_t len);

/**
 * Slant range from a ground point to a satellite `ground_arc_km` away along the surface.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QlinkStatus qlink_slant_range_km(double ground_arc_km, double altitude_km, double *out);

/**
 * Elevation angle (radians) of a satellite `ground_arc_km` away along the surface.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QlinkStatus qlink_elevation_rad(double ground_arc_km, double altitude_km, double *out);

/**
 * Total transmission of one hop: diffraction times atmosphere.
 *
 * `elevation_rad <= 0` selects an inter-satellite hop (no atmosphere).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QlinkStatus qlink_hop_transmission(double path_km,
                                        double elevation_rad,
                                        double divergence_urad,
                                        double wavelength_nm,
                                        double rx_radius_m,
                                        double zenith_transmissivity,
                                        double *out);

/**
 * Binary entropy in bits.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QlinkStatus qlink_binary_entropy(double e, double *out);

/**
 * Secret bits per channel use, clamped at zero. Total: never fails.
 */
double qlink_secret_key_rate(double yield_per_use,
                             double qber_x,
                             double qber_z,
                             double ec_inefficiency);

/**
 * Entanglement-distribution time (seconds) of a QND-heralded chain.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum QlinkStatus qlink_qnd_time(double p0_avg,
                                uint32_t nesting_level,
                                double source_rate_hz,
                                double source_efficiency,
                                double qnd_efficiency,
                                double memory_efficiency,
                                double detector_efficiency,
                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QLINK_H */
