/* C interface to the lawnsim simulation library. */

#ifndef LAWNSIM_H
#define LAWNSIM_H

/* Generated by cbindgen from lawnsim-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/* Opaque handles; construct and release through the lawn_* functions. */
typedef struct LawnScenario LawnScenario;
typedef struct LawnGraph LawnGraph;

// Status code of every fallible call.
typedef enum LawnStatus {
  LAWN_STATUS_OK = 0,
  // A required pointer argument was NULL.
  LAWN_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  LAWN_STATUS_INVALID_UTF8 = 2,
  // Configuration rejected (bad JSON or invalid parameter ranges).
  LAWN_STATUS_CONFIG_ERROR = 3,
  // A documented API precondition was violated.
  LAWN_STATUS_CONTRACT_VIOLATION = 4,
  // The engine failed on a domain or geometry precondition.
  LAWN_STATUS_ENGINE_ERROR = 5,
  // A numerical routine failed beyond recovery.
  LAWN_STATUS_NUMERICAL_ERROR = 6,
  LAWN_STATUS_IO_ERROR = 7,
  // The library panicked; state may be inconsistent.
  LAWN_STATUS_PANIC = 8,
} LawnStatus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Crate version as a static NUL-terminated string; never freed.
const char *lawn_version(void);

// Message of the most recent failure on this thread, or NULL if none.
// The caller owns the returned string (free with [`lawn_string_free`]).
char *lawn_last_error_message(void);

// Release a string returned by this library.
//
// # Safety
// `s` must be NULL or a pointer previously returned by a `lawn_*`
// function that hands ownership to the caller, not yet freed.
void lawn_string_free(char *s);

// Friis free-space path loss in dB.
//
// # Safety
// `out_db` must point to writable memory for one `double`.
enum LawnStatus lawn_fspl_db(double distance_m, double freq_hz, double *out_db);

// Generate a deployment from a scenario-config JSON document (the same
// schema as the spec's `scenario` block). On success `*out` receives a
// handle to free with [`lawn_scenario_free`].
//
// # Safety
// `config_json` must be NULL-terminated UTF-8; `out` must be writable.
enum LawnStatus lawn_scenario_generate(const char *config_json, LawnScenario **out);

// Number of nodes in the deployment.
//
// # Safety
// `scenario` must be a live handle; `out_count` must be writable.
enum LawnStatus lawn_scenario_node_count(const LawnScenario *scenario, size_t *out_count);

// Full node list as a JSON document (caller frees).
//
// # Safety
// `scenario` must be a live handle; `out_json` must be writable.
enum LawnStatus lawn_scenario_to_json(const LawnScenario *scenario, char **out_json);

// # Safety
// `scenario` must be NULL or a live handle, not yet freed.
void lawn_scenario_free(LawnScenario *scenario);

// Build the thresholded graph over a deployment. `channel_json` may be
// NULL for default radio parameters. On success `*out` receives a handle
// to free with [`lawn_graph_free`].
//
// # Safety
// `scenario` must be a live handle; `channel_json` NULL or
// NUL-terminated UTF-8; `out` writable.
enum LawnStatus lawn_graph_build(const LawnScenario *scenario,
                                 const char *channel_json,
                                 double threshold_db,
                                 LawnGraph **out);

// Degree statistics over active nodes and live edges. Any output
// pointer may be NULL to skip that value.
//
// # Safety
// `graph` must be a live handle; non-NULL outputs must be writable.
enum LawnStatus lawn_graph_degree_stats(const LawnGraph *graph,
                                        double *out_mean_degree,
                                        uint32_t *out_min_degree,
                                        uint32_t *out_max_degree,
                                        uint32_t *out_components);

// Number of live edges.
//
// # Safety
// `graph` must be a live handle; `out_count` must be writable.
enum LawnStatus lawn_graph_edge_count(const LawnGraph *graph, size_t *out_count);

// Live edge list as `a,b,kind,weight_db,distance_m` CSV (caller frees).
//
// # Safety
// `graph` must be a live handle; `out_csv` must be writable.
enum LawnStatus lawn_graph_edge_csv(const LawnGraph *graph, char **out_csv);

// # Safety
// `graph` must be NULL or a live handle, not yet freed.
void lawn_graph_free(LawnGraph *graph);

// Run a full experiment spec (the CLI's JSON schema) with `jobs` worker
// threads and return the result table as CSV (caller frees). The table
// bytes are identical for any worker count.
//
// # Safety
// `spec_json` must be NUL-terminated UTF-8; `out_table_csv` writable.
enum LawnStatus lawn_run_experiment(const char *spec_json, size_t jobs, char **out_table_csv);

// Summarize a result-table CSV into the summary JSON document
// (caller frees).
//
// # Safety
// `table_csv` must be NUL-terminated UTF-8; `out_json` writable.
enum LawnStatus lawn_summarize_table(const char *table_csv, char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LAWNSIM_H */
