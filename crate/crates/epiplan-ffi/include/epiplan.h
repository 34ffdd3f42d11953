/* C interface for the epiplan episodic-memory planner. Generated by cbindgen; do not edit. */

#ifndef EPIPLAN_H
#define EPIPLAN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible function.
//
// Anything other than `Ok` leaves a human-readable explanation in
// [`ep_last_error_message`].
typedef enum EpStatus {
  // The call succeeded.
  EP_STATUS_OK = 0,
  // A required pointer argument was null.
  EP_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  EP_STATUS_INVALID_UTF8 = 2,
  // A configuration key or value was rejected.
  EP_STATUS_INVALID_CONFIG = 3,
  // An argument was structurally valid but unusable (bad agent name,
  // malformed track, dimension mismatch).
  EP_STATUS_INVALID_INPUT = 4,
  // The operation needs state that has not been built yet, such as
  // training before the collection phases have run.
  EP_STATUS_MISSING_DATA = 5,
  // Reading or writing an artifact failed.
  EP_STATUS_IO = 6,
  // A panic was caught at the boundary; this indicates a bug.
  EP_STATUS_PANIC = 7,
} EpStatus;

// Opaque run configuration. Create with [`ep_config_new`], adjust with
// [`ep_config_set`], release with [`ep_config_free`].
typedef struct EpConfig EpConfig;

// Opaque pipeline session: episodic memory, encoder, and latent grid for
// one configuration. Create with [`ep_session_new`], drive through the
// phase functions, release with [`ep_session_free`].
typedef struct EpSession EpSession;

// Evaluation results, mirroring the pipeline's metrics line.
typedef struct EpMetrics {
  // Fraction of the lap target completed, averaged over evaluation laps.
  double success_rate;
  // Mean driving speed in km/h over the evaluation episode.
  double avg_speed_kmh;
  // Environment steps stored in memory when the measurement was taken.
  uint64_t env_interactions;
  // Episodes stored in memory when the measurement was taken.
  uint32_t episodes;
} EpMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the library version as a static NUL-terminated string.
const char *ep_version(void);

// Returns the message for the most recent failure on the calling thread,
// or an empty string if nothing has failed yet.
//
// The pointer stays valid until the next epiplan call on this thread.
const char *ep_last_error_message(void);

// Allocates a configuration populated with the library defaults.
//
// Returns null only if allocation fails. Free with [`ep_config_free`].
struct EpConfig *ep_config_new(void);

// Releases a configuration. Passing null is a no-op.
//
// # Safety
// `config` must be null or a pointer from [`ep_config_new`] that has not
// been freed.
void ep_config_free(struct EpConfig *config);

// Assigns one configuration key, e.g. `ep_config_set(cfg, "g", "50")`.
//
// Accepts the same keys and value spellings as the CLI's `--set`.
//
// # Safety
// `config` must be a live [`ep_config_new`] pointer; `key` and `value`
// must be NUL-terminated strings.
enum EpStatus ep_config_set(struct EpConfig *config, const char *key, const char *value);

// Checks the full configuration for consistency, as session creation would.
//
// # Safety
// `config` must be a live [`ep_config_new`] pointer.
enum EpStatus ep_config_validate(const struct EpConfig *config);

// Creates a session from a configuration and stores the handle in `out`.
//
// The configuration is copied; it may be freed or reused afterwards.
//
// # Safety
// `config` must be a live [`ep_config_new`] pointer and `out` a valid
// destination for one pointer.
enum EpStatus ep_session_new(const struct EpConfig *config, struct EpSession **out);

// Releases a session. Passing null is a no-op.
//
// # Safety
// `session` must be null or a pointer from [`ep_session_new`] that has not
// been freed.
void ep_session_free(struct EpSession *session);

// Phase 1: collects straight-driving episodes on the training tracks.
//
// # Safety
// `session` must be a live [`ep_session_new`] pointer.
enum EpStatus ep_session_phase1(struct EpSession *session);

// Phase 2: explores states the phase-1 memory marks unsafe.
//
// Fails with [`EpStatus::MissingData`] until phase 1 has run.
//
// # Safety
// `session` must be a live [`ep_session_new`] pointer.
enum EpStatus ep_session_phase2(struct EpSession *session);

// Phase 3: planner-driven training episodes.
//
// On success, writes the final episode's training success percentage to
// `final_success_pct` when that pointer is non-null. Fails with
// [`EpStatus::MissingData`] until the collection phases have run.
//
// # Safety
// `session` must be a live [`ep_session_new`] pointer; `final_success_pct`
// must be null or a valid destination for one double.
enum EpStatus ep_session_train(struct EpSession *session, double *final_success_pct);

// Evaluates the trained planner on the held-out track.
//
// # Safety
// `session` must be a live [`ep_session_new`] pointer and `out` a valid
// destination for one [`EpMetrics`].
enum EpStatus ep_session_evaluate(const struct EpSession *session, struct EpMetrics *out);

// Runs a memoryless baseline agent (`"random"` or `"centerline"`) on the
// held-out track using the session's configuration.
//
// # Safety
// `config` must be a live [`ep_config_new`] pointer, `agent` a
// NUL-terminated string, and `out` a valid destination for one
// [`EpMetrics`].
enum EpStatus ep_baseline_run(const struct EpConfig *config,
                              const char *agent,
                              struct EpMetrics *out);

// Writes the session's artifacts (`config.txt`, `db.txt`, `masks.txt`,
// `encoder.txt`) into `dir`, creating it if necessary. The files use the
// same formats as the CLI, so a saved session can be picked up there.
//
// # Safety
// `session` must be a live [`ep_session_new`] pointer and `dir` a
// NUL-terminated path.
enum EpStatus ep_session_save(const struct EpSession *session, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPIPLAN_H */
