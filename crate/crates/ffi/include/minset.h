#ifndef MINSET_H
#define MINSET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * How a report's element list was established.
 */
typedef enum MinsetMode {
  MINSET_MODE_EXACT_AUTOMATIC = 0,
  MINSET_MODE_BOUNDED = 1,
  MINSET_MODE_VERIFIED_COMPLETE = 2,
  MINSET_MODE_UNDECIDED = 3,
} MinsetMode;

typedef enum MinsetStatus {
  MINSET_STATUS_OK = 0,
  MINSET_STATUS_NULL_POINTER = 1,
  MINSET_STATUS_INVALID_UTF8 = 2,
  MINSET_STATUS_PARSE = 3,
  MINSET_STATUS_DOMAIN = 4,
  MINSET_STATUS_NOT_A_MEMBER = 5,
  MINSET_STATUS_UNDECIDED = 6,
  MINSET_STATUS_MISSING_DATA = 7,
  MINSET_STATUS_ITERATION_CAP = 8,
  MINSET_STATUS_IO = 9,
  MINSET_STATUS_PANIC = 10,
} MinsetStatus;

/**
 * Factoring policy and data tables.
 */
typedef struct MinsetContext MinsetContext;

/**
 * A minimal-set report.
 */
typedef struct MinsetReport MinsetReport;

/**
 * A parsed set expression.
 */
typedef struct MinsetSpec MinsetSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string.
 */
const char *minset_version(void);

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *minset_last_error(void);

void minset_string_free(char *s);

/**
 * `data_dir` may be null for no tables.
 */
enum MinsetStatus minset_context_new(const char *data_dir, struct MinsetContext **out);

void minset_context_free(struct MinsetContext *ctx);

enum MinsetStatus minset_spec_parse(const char *expr, struct MinsetSpec **out);

void minset_spec_free(struct MinsetSpec *spec);

/**
 * Membership of the decimal value `n`. `*out` is 1 (member), 0 (not) or
 * -1 (conditional). `ctx` may be null.
 */
enum MinsetStatus minset_is_member(const struct MinsetContext *ctx,
                                   const struct MinsetSpec *spec,
                                   const char *n,
                                   int *out);

/**
 * Minimal elements up to `bound`.
 */
enum MinsetStatus minset_compute_bounded(const struct MinsetContext *ctx,
                                         const struct MinsetSpec *spec,
                                         uint32_t base,
                                         uint64_t bound,
                                         struct MinsetReport **out);

/**
 * Exact minimal set of a residue-automatic set.
 */
enum MinsetStatus minset_compute_exact(const struct MinsetContext *ctx,
                                       const struct MinsetSpec *spec,
                                       uint32_t base,
                                       struct MinsetReport **out);

/**
 * Completeness check of a comma separated candidate written in `base`.
 * An Undecided outcome still yields a report; inspect its mode.
 */
enum MinsetStatus minset_verify(const struct MinsetContext *ctx,
                                const struct MinsetSpec *spec,
                                uint32_t base,
                                const char *candidate,
                                struct MinsetReport **out);

void minset_report_free(struct MinsetReport *report);

enum MinsetStatus minset_report_mode(const struct MinsetReport *report, enum MinsetMode *out);

/**
 * Number of minimal elements; 0 for a null report.
 */
size_t minset_report_len(const struct MinsetReport *report);

/**
 * Element `index` as a decimal string; null when out of range.
 */
char *minset_report_element(const struct MinsetReport *report, size_t index);

/**
 * Full report as JSON; null on a null report.
 */
char *minset_report_json(const struct MinsetReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MINSET_H */
