#ifndef MTS_H
#define MTS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum MtsStatus {
  MTS_STATUS_OK = 0,
  // A required pointer was null or a string was not UTF-8.
  MTS_STATUS_NULL_ARGUMENT = 1,
  MTS_STATUS_UNKNOWN_APP = 2,
  // Unknown option, missing or invalid option value.
  MTS_STATUS_INVALID_OPTION = 3,
  // The input could not be parsed or the run could not be set up.
  MTS_STATUS_INVALID_INPUT = 4,
  // Emergency stop or worker failure.
  MTS_STATUS_ABORTED = 5,
  // A clean stop was honored before the enumeration finished.
  MTS_STATUS_STOPPED = 6,
  // An internal error; the handle should be freed.
  MTS_STATUS_INTERNAL = 7,
} MtsStatus;

// A configured run.
typedef struct MtsRun MtsRun;

// Receives output bytes; `data` is valid only during the call.
typedef void (*MtsOutputFn)(void *user, const char *data, size_t len);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a run of application `app` ("topsort" or "spantree") on the
// NUL-terminated input text. Returns null on failure, with the reason in
// `*status` when `status` is not null.
//
// # Safety
// `app` and `input` must be null or valid NUL-terminated strings; `status`
// must be null or valid for writes.
struct MtsRun *mts_run_new(const char *app, const char *input, enum MtsStatus *status);

// Sets a framework or application option such as "-maxnodes" or
// "-countonly". `value` is null for options without a parameter.
//
// # Safety
// `run` must come from `mts_run_new`; strings as for `mts_run_new`.
enum MtsStatus mts_run_set_option(struct MtsRun *run, const char *name, const char *value);

// Installs the output callback. Without one, output is discarded.
//
// # Safety
// `run` must come from `mts_run_new`. `user` is passed back verbatim.
enum MtsStatus mts_run_set_output(struct MtsRun *run, MtsOutputFn callback, void *user);

// Runs the enumeration. `workers == 0` runs standalone in the calling
// thread; otherwise a master drives that many worker threads. The node
// total (root included) is stored in `*total` when not null.
//
// # Safety
// `run` must come from `mts_run_new`; `total` must be null or valid for
// writes.
enum MtsStatus mts_run_execute(struct MtsRun *run, uint32_t workers, uint64_t *total);

// Frees a run handle. Null is ignored.
//
// # Safety
// `run` must be null or come from `mts_run_new`, and not be used again.
void mts_run_free(struct MtsRun *run);

// The scheduler's budget rule. `max_depth == 0` means unbounded on input
// and output.
//
// # Safety
// `out_depth` and `out_nodes` must be valid for writes.
enum MtsStatus mts_next_budget(uint64_t joblist_size,
                               uint64_t workers,
                               uint64_t max_depth,
                               uint64_t max_nodes,
                               uint64_t scale,
                               uint64_t lmin,
                               uint64_t lmax,
                               uint64_t *out_depth,
                               uint64_t *out_nodes);

// Description of the last failure on this thread, or null. Valid until
// the next call into this library on the same thread.
const char *mts_last_error(void);

// Library version as a static string.
const char *mts_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MTS_H */
