#ifndef SATFORGE_H
#define SATFORGE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum {
  SATFORGE_STATUS_OK = 0,
  /**
   * A pointer argument was NULL or a string was not valid UTF-8.
   */
  SATFORGE_STATUS_INVALID_ARGUMENT = 1,
  /**
   * The problem text failed to parse.
   */
  SATFORGE_STATUS_PARSE_ERROR = 2,
  /**
   * The problem failed a structural gate (malformed, inconsistent
   * preconditions, or conditional effects).
   */
  SATFORGE_STATUS_REJECTED_PROBLEM = 3,
  /**
   * The supplied assignment is not a model of the encoding.
   */
  SATFORGE_STATUS_MODEL_ERROR = 4,
} SatforgeStatus;

/**
 * An opaque, immutable planning problem.
 */
typedef struct SatforgeProblem SatforgeProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses Fast-Downward translator format into a new problem handle.
 *
 * On success writes the handle to `out` and returns `Ok`; the handle must
 * be released with [`satforge_problem_free`].
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a valid pointer.
 */
SatforgeStatus satforge_problem_parse(const char *text, SatforgeProblem **out);

/**
 * Releases a problem handle. NULL is a no-op.
 *
 * # Safety
 * `problem` must be NULL or a handle from [`satforge_problem_parse`] that
 * has not been freed.
 */
void satforge_problem_free(SatforgeProblem *problem);

/**
 * Encodes the problem at the given horizon and writes the DIMACS-CNF text
 * to `out`.
 *
 * # Safety
 * `problem` must be a live handle and `out` a valid pointer.
 */
SatforgeStatus satforge_encode(const SatforgeProblem *problem, uintptr_t horizon, char **out);

/**
 * Decodes a solver model (DIMACS-style literal list) into a serial plan,
 * written to `out` as one parenthesised operator name per line.
 *
 * # Safety
 * `problem` must be a live handle; `model_text` a valid NUL-terminated
 * string; `out` a valid pointer.
 */
SatforgeStatus satforge_decode(const SatforgeProblem *problem,
                               uintptr_t horizon,
                               const char *model_text,
                               char **out);

/**
 * Checks a plan (as written by [`satforge_decode`]) against the execution
 * semantics; writes 1 to `out_valid` if it reaches the goal, else 0.
 *
 * # Safety
 * `problem` must be a live handle; `plan_text` a valid NUL-terminated
 * string; `out_valid` a valid pointer.
 */
SatforgeStatus satforge_validate(const SatforgeProblem *problem,
                                 const char *plan_text,
                                 int32_t *out_valid);

/**
 * Releases a string returned by this library. NULL is a no-op.
 *
 * # Safety
 * `s` must be NULL or a string obtained from this library that has not
 * been freed.
 */
void satforge_string_free(char *s);

/**
 * Returns the message for the most recent failure on this thread, or NULL
 * if the last call succeeded. The pointer is valid until the next call
 * into this library on the same thread; do not free it.
 */
const char *satforge_last_error(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SATFORGE_H */
