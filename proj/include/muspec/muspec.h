#ifndef MUSPEC_H
#define MUSPEC_H

#include <stddef.h>

#if defined(_WIN32)
#define MUSPEC_API __declspec(dllexport)
#else
#define MUSPEC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum muspec_status {
  MUSPEC_OK = 0,
  MUSPEC_ERR_ARGUMENT = 1,   /* null handle or output pointer */
  MUSPEC_ERR_SYNTAX = 2,     /* malformed expression */
  MUSPEC_ERR_DOMAIN = 3,     /* expression left the real domain */
  MUSPEC_ERR_VALIDATION = 4, /* descriptor, option or request rejected */
  MUSPEC_ERR_NUMERIC = 5,    /* singular coefficient, no admissible pairs */
  MUSPEC_ERR_INTERNAL = 6
} muspec_status;

typedef enum muspec_outcome {
  MUSPEC_HOLDS = 0,
  MUSPEC_FAILS = 1,
  MUSPEC_INCONCLUSIVE = 2
} muspec_outcome;

typedef struct muspec_rate muspec_rate;
typedef struct muspec_system muspec_system;
typedef struct muspec_spectrum muspec_spectrum;

/* Message of the last failed call on this thread ("" if none). */
MUSPEC_API const char* muspec_last_error(void);

/* Frees strings returned through char** outputs. */
MUSPEC_API void muspec_string_free(char* s);

MUSPEC_API const char* muspec_version(void);

/* Rates: "catalog:NAME", a bare catalog name, inline JSON or a JSON file.
   time_domain is "discrete", "continuous" or NULL (discrete). */
MUSPEC_API muspec_status muspec_rate_parse(const char* spec, const char* time_domain,
                                           muspec_rate** out);
MUSPEC_API void muspec_rate_free(muspec_rate* rate);
MUSPEC_API muspec_status muspec_rate_to_json(const muspec_rate* rate, char** out);
MUSPEC_API muspec_status muspec_rate_log(const muspec_rate* rate, double t, double* out);
/* 1 when the spec names a rate that exists only in continuous time. */
MUSPEC_API int muspec_rate_spec_continuous_only(const char* spec);

/* Systems: same spec forms as rates. Table paths resolve against base_dir
   (NULL: the JSON file's directory, or the working directory). */
MUSPEC_API muspec_status muspec_system_parse(const char* spec, const char* base_dir,
                                             muspec_system** out);
MUSPEC_API void muspec_system_free(muspec_system* system);
MUSPEC_API muspec_status muspec_system_to_json(const muspec_system* system, char** out);
MUSPEC_API size_t muspec_system_dimension(const muspec_system* system);
MUSPEC_API int muspec_system_is_continuous(const muspec_system* system);

/* Evolution operator Phi(to, from) = exp(log_norm) * unit. unit receives d*d
   row-major entries and may be NULL. */
MUSPEC_API muspec_status muspec_propagate(const muspec_system* system, double to, double from,
                                          const char* options_json, double* log_norm,
                                          double* unit);

/* options_json may be NULL or an object with any of: schedule,
   cutoff_fraction, tol_stab, gamma_max, delta_merge, sample_step,
   integration_step, threads, relation_step, epsilon_grid, almost_fixed,
   search_exp_lo, search_exp_hi, conclusion_tol. */
MUSPEC_API muspec_status muspec_spectrum_compute(const muspec_system* system,
                                                 const muspec_rate* rate,
                                                 const char* options_json,
                                                 muspec_spectrum** out);
MUSPEC_API void muspec_spectrum_free(muspec_spectrum* spectrum);
MUSPEC_API int muspec_spectrum_converged(const muspec_spectrum* spectrum);
MUSPEC_API muspec_status muspec_spectrum_json(const muspec_spectrum* spectrum, char** out);
MUSPEC_API muspec_status muspec_spectrum_csv(const muspec_spectrum* spectrum, char** out);
MUSPEC_API muspec_status muspec_spectrum_table(const muspec_spectrum* spectrum, char** out);
/* {"dichotomy":{"verdict","projector_rank","projector_pattern","reason"},
    "growth":{"outcome","a"}} */
MUSPEC_API muspec_status muspec_spectrum_verdicts(const muspec_spectrum* spectrum, char** out);

/* relation: faster, faster-backward, weakly-faster, almost-faster,
   almost-slower, weakly-equivalent, equivalent, order, profile. For order,
   a is the lower rate. For profile the outcome is MUSPEC_HOLDS unless the
   numeric and closed-form answers disagree. */
MUSPEC_API muspec_status muspec_compare(const muspec_rate* a, const muspec_rate* b,
                                        const char* relation, const char* options_json,
                                        char** out_json, muspec_outcome* outcome);

MUSPEC_API muspec_status muspec_chain(const muspec_rate* const* rates, size_t count,
                                      const char* options_json, char** out_json,
                                      muspec_outcome* outcome);

/* request_json: {"theorem": id or "all", "systems": [specs] (default: the
   built-in fixtures), "mu", "omega", "chain": [specs], "a", "b",
   "options": {...}}. Writes one report per line. */
MUSPEC_API muspec_status muspec_verify(const char* request_json, char** out_jsonl,
                                       size_t* passed, size_t* failed, size_t* skipped);

/* {"rates":[{"name","summary","descriptor"}],"systems":[...]} */
MUSPEC_API muspec_status muspec_catalog_json(char** out);

#ifdef __cplusplus
}
#endif

#endif
