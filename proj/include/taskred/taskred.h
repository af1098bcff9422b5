#ifndef TASKRED_TASKRED_H
#define TASKRED_TASKRED_H

#include <stddef.h>
#include <stdint.h>

#if defined(TASKRED_BUILDING)
#define TRD_API __attribute__((visibility("default")))
#else
#define TRD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. 1..7 match the library's error kinds. */
typedef enum trd_status {
  TRD_OK = 0,
  TRD_ERR_CONFIGURATION = 1,
  TRD_ERR_UNSUPPORTED = 2,
  TRD_ERR_PRECONDITION = 3,
  TRD_ERR_TRAINING = 4,
  TRD_ERR_USAGE = 5,
  TRD_ERR_VALIDATION = 6,
  TRD_ERR_IO = 7,
  TRD_ERR_INTERNAL = 99
} trd_status;

typedef struct trd_task trd_task;
typedef struct trd_policy trd_policy;

/* Receives one progress line at a time; may be NULL. */
typedef void (*trd_log_fn)(const char* line, void* user);

TRD_API const char* trd_version(void);

/* Message of the last failed call on this thread ("" when none). */
TRD_API const char* trd_last_error(void);

/* Frees strings returned through char** out-parameters. */
TRD_API void trd_string_free(char* s);

/* Tasks from a config task block, e.g. {"env":"cartpole","direction":"down"}. */
TRD_API trd_status trd_task_from_json(const char* block, trd_task** out);
TRD_API void trd_task_free(trd_task* task);
/* {"name", "digest", "horizon", "success_threshold", "finite", "observations", "actions"} */
TRD_API trd_status trd_task_describe(const trd_task* task, char** json_out);

TRD_API trd_status trd_policy_from_json(const char* doc, trd_policy** out);
TRD_API void trd_policy_free(trd_policy* policy);

/* Exact clipped expected return; finite tasks only. */
TRD_API trd_status trd_exact_return(const trd_task* task, const trd_policy* policy, double* out);
TRD_API trd_status trd_estimate_return(const trd_task* task, const trd_policy* policy, size_t rollouts, uint64_t seed,
                                       double* value, double* standard_error);

/* Validates an experiment file after applying "a.b=value" overrides. On
   TRD_ERR_VALIDATION, *diagnostics_json (if given) receives
   [{"pointer","line","message","text"}]. */
TRD_API trd_status trd_config_validate(const char* path, const char* const* overrides, size_t n_overrides,
                                       char** diagnostics_json);

/* Runs an experiment. Per-job compute errors do not fail the call: the report
   {"output","records","failures","manifest"} counts them. */
TRD_API trd_status trd_run(const char* path, const char* const* overrides, size_t n_overrides, trd_log_fn log, void* user,
                           char** report_json);

/* figure: "fig2" | "fig3" | "fig4". inputs: result directories or records.jsonl files. */
TRD_API trd_status trd_plot_data(const char* const* inputs, size_t n_inputs, const char* figure, char** csv,
                                 char** warnings_json);

/* Runs property suites (all when n_suites is 0). *all_passed is 1 or 0. */
TRD_API trd_status trd_props(const char* const* suites, size_t n_suites, trd_log_fn log, void* user, char** report_json,
                             int* all_passed);

/* Comma-separated suite names. Static storage, do not free. */
TRD_API const char* trd_props_suites(void);

#ifdef __cplusplus
}
#endif

#endif
