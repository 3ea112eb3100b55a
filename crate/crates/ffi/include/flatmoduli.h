#ifndef FLATMODULI_H
#define FLATMODULI_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum fm_status {
  FM_STATUS_OK = 0,
  FM_STATUS_NULL_POINTER = 1,
  FM_STATUS_INVALID_UTF8 = 2,
  FM_STATUS_INVALID_ARGUMENT = 3,
  FM_STATUS_CONFIG = 4,
  FM_STATUS_NUMERICAL = 5,
  FM_STATUS_UNSUPPORTED = 6,
  FM_STATUS_IO = 7,
  FM_STATUS_PANIC = 8,
} fm_status;

/**
 * Report outcome, mirroring the command line exit codes.
 */
typedef enum fm_outcome {
  FM_OUTCOME_PASS = 0,
  FM_OUTCOME_FAIL = 1,
  FM_OUTCOME_UNDECIDED = 2,
} fm_outcome;

/**
 * A solvable matrix group.
 */
typedef struct fm_group fm_group;

/**
 * A parsed job configuration.
 */
typedef struct fm_job fm_job;

/**
 * The result of running a command.
 */
typedef struct fm_report fm_report;

/**
 * A flat complex torus with its spectral cutoff.
 */
typedef struct fm_torus fm_torus;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *fm_last_error(void);

/**
 * Library version as a static string.
 */
const char *fm_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void fm_string_free(char *s);

/**
 * Parses a JSON job configuration.
 *
 * # Safety
 * `config_json` must be a nul-terminated string, `out_job` writable.
 */
enum fm_status fm_job_from_json(const char *config_json, struct fm_job **out_job);

/**
 * Overrides the seed of a job.
 *
 * # Safety
 * `job` must be a live handle.
 */
enum fm_status fm_job_set_seed(struct fm_job *job, uint64_t seed);

/**
 * # Safety
 * `job` must be null or a live handle; it is invalid afterwards.
 */
void fm_job_free(struct fm_job *job);

/**
 * Runs `command` (for example `"classify"`) on a job. A report is produced
 * even when checks fail; inspect it with [`fm_report_outcome`].
 *
 * # Safety
 * `job` must be a live handle, `command` a nul-terminated string and
 * `out_report` writable.
 */
enum fm_status fm_job_run(const struct fm_job *job,
                          const char *command,
                          struct fm_report **out_report);

/**
 * # Safety
 * `report` must be a live handle, `out_outcome` writable.
 */
enum fm_status fm_report_outcome(const struct fm_report *report, enum fm_outcome *out_outcome);

/**
 * The report as JSON lines without a timestamp. Free with [`fm_string_free`].
 *
 * # Safety
 * `report` must be a live handle, `out_text` writable.
 */
enum fm_status fm_report_jsonl(const struct fm_report *report, char **out_text);

/**
 * # Safety
 * `report` must be null or a live handle; it is invalid afterwards.
 */
void fm_report_free(struct fm_report *report);

/**
 * Builds a group from a family name (`"T"`, `"BorelSp"`, `"BorelSO"`) and
 * the size of its matrices.
 *
 * # Safety
 * `family` must be a nul-terminated string, `out_group` writable.
 */
enum fm_status fm_group_new(const char *family, size_t size, struct fm_group **out_group);

/**
 * Ambient matrix size, dimension of the algebra and rank of the torus part.
 *
 * # Safety
 * `group` must be a live handle; the outputs must be writable.
 */
enum fm_status fm_group_dims(const struct fm_group *group,
                             size_t *out_ambient,
                             size_t *out_dim,
                             size_t *out_rank);

/**
 * Hodge certificate of the group as JSON with fields `verdict`
 * (`"certified"`, `"failed"` or `"unknown"`), `certificate` and `report`.
 * Free with [`fm_string_free`].
 *
 * # Safety
 * `group` must be a live handle, `out_json` writable.
 */
enum fm_status fm_group_certificate(const struct fm_group *group, char **out_json);

/**
 * # Safety
 * `group` must be null or a live handle; it is invalid afterwards.
 */
void fm_group_free(struct fm_group *group);

/**
 * Builds the torus `ℂ^g / Λ`. `periods` holds the `g × 2g` period matrix
 * row-major as interleaved real and imaginary parts (`4 g²` doubles).
 *
 * # Safety
 * `periods` must point to `4 g²` readable doubles, `out_torus` writable.
 */
enum fm_status fm_torus_new(size_t g,
                            const double *periods,
                            size_t cutoff,
                            struct fm_torus **out_torus);

/**
 * Complex dimension and number of Fourier modes in the band.
 *
 * # Safety
 * `torus` must be a live handle; the outputs must be writable.
 */
enum fm_status fm_torus_dims(const struct fm_torus *torus, size_t *out_g, size_t *out_modes);

/**
 * # Safety
 * `torus` must be null or a live handle; it is invalid afterwards.
 */
void fm_torus_free(struct fm_torus *torus);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLATMODULI_H */
