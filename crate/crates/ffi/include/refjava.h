#ifndef REFJAVA_H
#define REFJAVA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Skip protocol checking.
 */
#define RJ_FLAG_NO_PROTOCOL 1

/**
 * Skip refinement checking.
 */
#define RJ_FLAG_NO_REFINEMENTS 2

/**
 * Diagnostic kinds, mirroring the checker's.
 */
typedef enum RjKind {
  RJ_KIND_SYNTAX = 0,
  RJ_KIND_BASE_TYPE = 1,
  RJ_KIND_REFINEMENT_TYPE = 2,
  RJ_KIND_PROTOCOL = 3,
  RJ_KIND_ANNOTATION = 4,
  RJ_KIND_INTERNAL = 5,
} RjKind;

/**
 * Result codes. Zero is success.
 */
typedef enum RjStatus {
  RJ_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  RJ_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  RJ_STATUS_INVALID_UTF8 = 2,
  /**
   * A diagnostic index was past the end of the report.
   */
  RJ_STATUS_OUT_OF_RANGE = 3,
  /**
   * The same path was added twice to one session.
   */
  RJ_STATUS_DUPLICATE_PATH = 4,
  /**
   * The checker panicked; the session is still usable.
   */
  RJ_STATUS_INTERNAL = 5,
} RjStatus;

/**
 * The outcome of a check. Opaque to C.
 */
typedef struct RjReport RjReport;

/**
 * Sources and options for one check. Opaque to C.
 */
typedef struct RjSession RjSession;

/**
 * A diagnostic's location, 1-based line and column.
 */
typedef struct RjPosition {
  uint32_t line;
  uint32_t column;
} RjPosition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates an empty session with every check enabled.
 */
struct RjSession *rj_session_new(void);

/**
 * Frees a session. Null is ignored.
 *
 * # Safety
 * `session` must come from [`rj_session_new`] and not be used afterwards.
 */
void rj_session_free(struct RjSession *session);

/**
 * Sets `RJ_FLAG_*` bits for later checks.
 *
 * # Safety
 * `session` must be a live session or null.
 */
enum RjStatus rj_session_set_flags(struct RjSession *session, uint32_t flags);

/**
 * Adds one source file. `path` names it in diagnostics.
 *
 * # Safety
 * `session` must be a live session; `path` and `text` NUL-terminated strings.
 */
enum RjStatus rj_session_add_source(struct RjSession *session, const char *path, const char *text);

/**
 * Checks every source in the session together and stores a new report
 * in `*out`. The session is unchanged and may be checked again.
 *
 * # Safety
 * `session` must be a live session and `out` a valid pointer.
 */
enum RjStatus rj_session_check(const struct RjSession *session, struct RjReport **out);

/**
 * Frees a report and every string it handed out. Null is ignored.
 *
 * # Safety
 * `report` must come from [`rj_session_check`] and not be used afterwards.
 */
void rj_report_free(struct RjReport *report);

/**
 * Number of diagnostics; 0 for null.
 *
 * # Safety
 * `report` must be a live report or null.
 */
size_t rj_report_len(const struct RjReport *report);

/**
 * All diagnostics in the CLI's text format.
 *
 * # Safety
 * `report` must be a live report or null.
 */
const char *rj_report_text(const struct RjReport *report);

/**
 * All diagnostics as the CLI's JSON array.
 *
 * # Safety
 * `report` must be a live report or null.
 */
const char *rj_report_json(const struct RjReport *report);

/**
 * Text of diagnostic `index`, or null when out of range.
 *
 * # Safety
 * `report` must be a live report or null.
 */
const char *rj_report_message(const struct RjReport *report, size_t index);

/**
 * Kind and start position of diagnostic `index`. Either out pointer may be null.
 *
 * # Safety
 * `report` must be a live report; `kind` and `position` valid or null.
 */
enum RjStatus rj_report_get(const struct RjReport *report,
                            size_t index,
                            enum RjKind *kind,
                            struct RjPosition *position);

/**
 * A static description of a status code.
 */
const char *rj_status_message(enum RjStatus status);

/**
 * The library version, e.g. "0.1.0".
 */
const char *rj_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* REFJAVA_H */
