#ifndef POL_POL_H
#define POL_POL_H

#include <stddef.h>
#include <stdint.h>

#if defined(POL_BUILDING_LIBRARY)
#define POL_API __attribute__((visibility("default")))
#else
#define POL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pol_status {
  POL_OK = 0,
  POL_ERR_INVALID_ARGUMENT = 1,
  POL_ERR_DOMAIN = 2,
  POL_ERR_LIMIT_EXCEEDED = 3,
  POL_ERR_NON_CONVERGENCE = 4,
  POL_ERR_PARSE = 5,
  POL_ERR_IO = 6,
  POL_ERR_PRECONDITION = 7,
  POL_ERR_INTERNAL = 8
} pol_status;

typedef enum pol_norm_kind {
  POL_NORM_GAUGE = 0,
  POL_NORM_ORLICZ = 1,    /* dual (KKT) form */
  POL_NORM_AMEMIYA = 2,
  POL_NORM_STAR = 3,      /* exact oracle; simple functions only */
  POL_NORM_STARSTAR = 4,  /* exact oracle; simple functions only */
  POL_NORM_L1 = 5,
  POL_NORM_L2 = 6,
  POL_NORM_STAR_HSU = 7
} pol_norm_kind;

typedef enum pol_format { POL_FORMAT_CSV = 0, POL_FORMAT_JSON = 1 } pol_format;

typedef struct pol_function pol_function;
typedef struct pol_result pol_result;

typedef struct pol_value {
  double value;
  double err;
  int discretized;
} pol_value;

typedef struct pol_estimate {
  double mean;
  double std_error;
  double truncation_bound;
  uint64_t replicates;
  uint64_t seed;
} pol_estimate;

/* Message of the last failed call on this thread; empty after a success. */
POL_API const char* pol_last_error(void);
POL_API const char* pol_status_name(pol_status s);

/* 0 selects the hardware concurrency. Results never depend on this setting. */
POL_API pol_status pol_set_threads(unsigned n);

/* Function from a spec string. `system` may be NULL unless the spec uses
   birkhoff/transfer/compose. */
POL_API pol_status pol_function_parse(const char* spec, const char* system, pol_function** out);
POL_API pol_status pol_function_from_atoms(const double* values, const double* masses, size_t n,
                                           pol_function** out);
POL_API void pol_function_free(pol_function* f);
POL_API int pol_function_is_simple(const pol_function* f);
POL_API double pol_function_eval(const pol_function* f, double x);

/* tol is used by the quadrature paths (non-simple functions, Hsu). */
POL_API pol_status pol_function_norm(const pol_function* f, pol_norm_kind kind, double tol, pol_value* out);

/* Monte Carlo E|I_1(f)| (centered != 0) or E|N(f)| over the support window. */
POL_API pol_status pol_function_estimate(const pol_function* f, int centered, uint64_t replicates, uint64_t seed,
                                         pol_estimate* out);

/* Points of replicate `replicate` on a window such as "[0,1],[2,3]".
   Writes up to `cap` points; *count receives the full count. */
POL_API pol_status pol_sample(const char* window, uint64_t seed, uint64_t replicate, double* points, size_t cap,
                              size_t* count);

/* Canonical JSON of a scenario's defaults (seed unset). Free with pol_string_free. */
POL_API pol_status pol_default_config(const char* scenario, char** out);

/* Runs a JSON config. A non-NULL seed_override replaces the config's seed. */
POL_API pol_status pol_run_config(const char* config_json, const uint64_t* seed_override, pol_result** out);
POL_API pol_status pol_run_suite(uint64_t seed, pol_result** out);
POL_API void pol_result_free(pol_result* r);
POL_API int pol_result_all_pass(const pol_result* r);
POL_API size_t pol_result_failures(const pol_result* r);
POL_API pol_status pol_result_render(const pol_result* r, pol_format format, char** out);

POL_API void pol_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
