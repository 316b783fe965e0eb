#ifndef CADORDER_H
#define CADORDER_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum CadorderStatus {
  CADORDER_STATUS_OK = 0,
  CADORDER_STATUS_NULL_POINTER = 1,
  CADORDER_STATUS_INVALID_UTF8 = 2,
  CADORDER_STATUS_PARSE = 3,
  CADORDER_STATUS_INVALID_ARGUMENT = 4,
  CADORDER_STATUS_INTERNAL = 5,
} CadorderStatus;

// Parsed heuristic: a feature chain or `mods`.
typedef struct CadorderHeuristic CadorderHeuristic;

// Polynomial system together with its variable names.
typedef struct CadorderSystem CadorderSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses `npolys` polynomials over the `nvars` named variables.
//
// # Safety
// `polys` and `vars` must point to arrays of that many NUL-terminated
// strings; `out` must be writable.
enum CadorderStatus cadorder_system_parse(const char *const *polys,
                                          size_t npolys,
                                          const char *const *vars,
                                          size_t nvars,
                                          struct CadorderSystem **out);

// Releases a system handle. Null is ignored.
//
// # Safety
// `system` must come from this library and not be used afterwards.
void cadorder_system_free(struct CadorderSystem *system);

// Number of polynomials in the system.
//
// # Safety
// `system` must be a live handle; `out` must be writable.
enum CadorderStatus cadorder_system_len(const struct CadorderSystem *system, size_t *out);

// Number of variables of the system.
//
// # Safety
// `system` must be a live handle; `out` must be writable.
enum CadorderStatus cadorder_system_nvars(const struct CadorderSystem *system, size_t *out);

// Renders polynomial `index` with the system's variable names. Free the
// result with [`cadorder_string_free`].
//
// # Safety
// `system` must be a live handle; `out` must be writable.
enum CadorderStatus cadorder_system_poly_string(const struct CadorderSystem *system,
                                                size_t index,
                                                char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void cadorder_string_free(char *s);

// Lazard projection eliminating variable `var` (0-based), as a new system
// over the same variables.
//
// # Safety
// `system` must be a live handle; `out` must be writable.
enum CadorderStatus cadorder_project(const struct CadorderSystem *system,
                                     size_t var,
                                     struct CadorderSystem **out);

// Evaluates a feature such as `sum(max(v_1(S)))`. The value is written to
// `out_value`; if `out_exact` is not null it receives the exact rational as
// a string such as `5/4`.
//
// # Safety
// `system` must be a live handle; `name` a NUL-terminated string;
// `out_value` writable; `out_exact` null or writable.
enum CadorderStatus cadorder_feature_value(const struct CadorderSystem *system,
                                           const char *name,
                                           double *out_value,
                                           char **out_exact);

// Parses a heuristic name: a feature chain such as `SumMaxV>AvgAvgV`, an
// alias (`Brown`, `gmods`, `T1`, `T2`, `random`) or `mods`.
// `lowest_index_ties` nonzero breaks final ties by lowest variable index
// instead of at random.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum CadorderStatus cadorder_heuristic_parse(const char *name,
                                             int32_t lowest_index_ties,
                                             struct CadorderHeuristic **out);

// Releases a heuristic handle. Null is ignored.
//
// # Safety
// `heuristic` must come from this library and not be used afterwards.
void cadorder_heuristic_free(struct CadorderHeuristic *heuristic);

// Chooses a variable ordering. `order` receives the projection order
// (variable indices, first projected first) and must hold `order_len`
// entries, at least the number of variables. `class_label` receives the
// 1-based class of the ordering. `seed` drives random tie-breaking.
//
// # Safety
// Handles must be live; `order` must be writable for `order_len` entries;
// `class_label` must be writable.
enum CadorderStatus cadorder_choose_ordering(const struct CadorderSystem *system,
                                             const struct CadorderHeuristic *heuristic,
                                             uint64_t seed,
                                             size_t *order,
                                             size_t order_len,
                                             size_t *class_label);

// Markup `(t - best) / (1 + best)` of a time against the best time.
//
// # Safety
// `out` must be writable.
enum CadorderStatus cadorder_markup(double time, double best, double *out);

// Message of the last failed call on this thread, or an empty string. The
// pointer stays valid until the next call on the same thread.
const char *cadorder_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *cadorder_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CADORDER_H */
