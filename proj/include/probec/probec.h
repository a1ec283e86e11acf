/* C interface to the probabilistic event recognizer.
 *
 * Objects are opaque handles created by probec_*_load/parse/... and
 * released with the matching *_free function. Every fallible call returns
 * a probec_status; on failure probec_last_error() describes the problem
 * for the calling thread. Strings returned through char** are owned by the
 * caller and released with probec_string_free().
 */
#ifndef PROBEC_H
#define PROBEC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PROBEC_BUILDING)
#    define PROBEC_API __declspec(dllexport)
#  else
#    define PROBEC_API __declspec(dllimport)
#  endif
#else
#  define PROBEC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum probec_status {
  PROBEC_OK = 0,
  PROBEC_ERR_PARSE = 1,
  PROBEC_ERR_INVALID_PROBABILITY = 2,
  PROBEC_ERR_DUPLICATE_FACT = 3,
  PROBEC_ERR_UNBOUND_HEAD_VARIABLE = 4,
  PROBEC_ERR_UNSAFE_VARIABLE = 5,
  PROBEC_ERR_CYCLIC_DEPENDENCY = 6,
  PROBEC_ERR_UNKNOWN_FLUENT = 7,
  PROBEC_ERR_TOO_MANY_VARS = 8,
  PROBEC_ERR_VAR_NOT_IN_ORDER = 9,
  PROBEC_ERR_NOT_CRISP = 10,
  PROBEC_ERR_INVALID_ARGUMENT = 11,
  PROBEC_ERR_IO = 12,
  /* probec_validate found engines disagreeing. */
  PROBEC_ERR_MISMATCH = 100,
  PROBEC_ERR_INTERNAL = 101
} probec_status;

typedef struct probec_rules probec_rules;
typedef struct probec_narrative probec_narrative;
typedef struct probec_truth probec_truth;
typedef struct probec_recognition probec_recognition;

PROBEC_API const char* probec_version(void);
PROBEC_API const char* probec_status_name(probec_status status);

/* Message, line and column (1-based, 0 if unknown) of the last failure on
 * this thread. */
PROBEC_API const char* probec_last_error(void);
PROBEC_API size_t probec_last_error_line(void);
PROBEC_API size_t probec_last_error_column(void);

PROBEC_API void probec_string_free(char* s);

/* ---- rules ------------------------------------------------------------ */

PROBEC_API probec_status probec_rules_load(const char* path, probec_rules** out);
PROBEC_API probec_status probec_rules_parse(const char* text, probec_rules** out);
/* The bundled surveillance activity definitions. */
PROBEC_API probec_status probec_rules_builtin(probec_rules** out);
PROBEC_API probec_status probec_rules_pretty(const probec_rules* rules, char** out);
PROBEC_API void probec_rules_free(probec_rules* rules);

/* ---- narratives ------------------------------------------------------- */

PROBEC_API probec_status probec_narrative_load(const char* path, probec_narrative** out);
PROBEC_API probec_status probec_narrative_parse(const char* text, probec_narrative** out);
PROBEC_API probec_status probec_narrative_emit(const probec_narrative* n, char** out);
PROBEC_API size_t probec_narrative_size(const probec_narrative* n);
PROBEC_API int64_t probec_narrative_horizon(const probec_narrative* n);
/* Probability of the i-th fact in frame order. */
PROBEC_API double probec_narrative_probability(const probec_narrative* n, size_t i);
/* Nonzero when every fact has probability exactly 1. */
PROBEC_API int probec_narrative_all_certain(const probec_narrative* n);
PROBEC_API void probec_narrative_free(probec_narrative* n);

/* ---- noise ------------------------------------------------------------ */

typedef enum probec_noise_level {
  PROBEC_NOISE_SMOOTH = 0,
  PROBEC_NOISE_INTERMEDIATE = 1,
  PROBEC_NOISE_STRONG = 2
} probec_noise_level;

typedef struct probec_noise_config {
  probec_noise_level level;
  double gamma_mean;
  double spurious_fraction;
  uint64_t seed;
} probec_noise_config;

PROBEC_API probec_status probec_noise_level_parse(const char* name, probec_noise_level* out);
PROBEC_API probec_status probec_inject(const probec_narrative* clean, const probec_noise_config* cfg,
                                       probec_narrative** out);
PROBEC_API probec_status probec_filter_crisp(const probec_narrative* n, double threshold,
                                             probec_narrative** out);

/* ---- recognition ------------------------------------------------------ */

typedef enum probec_engine {
  /* Exact probabilistic recognition. */
  PROBEC_ENGINE_PROB = 0,
  /* Probabilistic recognition with one number of state per atom. */
  PROBEC_ENGINE_PROB_SCALAR = 1,
  /* Boolean recognition; the narrative must be all-certain. */
  PROBEC_ENGINE_CRISP = 2
} probec_engine;

PROBEC_API probec_status probec_recognize(const probec_rules* rules, const probec_narrative* n,
                                          probec_engine engine, probec_recognition** out);
PROBEC_API size_t probec_recognition_count(const probec_recognition* r);
/* Fluent label ("moving", "f=2") and colon-joined arguments of atom i. */
PROBEC_API const char* probec_recognition_fluent(const probec_recognition* r, size_t i);
PROBEC_API const char* probec_recognition_args(const probec_recognition* r, size_t i);
/* Per-frame probabilities of atom i for frames 0..horizon. */
PROBEC_API const double* probec_recognition_probs(const probec_recognition* r, size_t i, size_t* len);
/* CSV fluent,args,frame,probability. */
PROBEC_API probec_status probec_recognition_trace_csv(const probec_recognition* r, char** out);
/* CSV fluent,args,frame of frames strictly above threshold. */
PROBEC_API probec_status probec_recognition_csv(const probec_recognition* r, double threshold, char** out);
PROBEC_API void probec_recognition_free(probec_recognition* r);

/* Compares the incremental engine with whole-query compilation and, when
 * the narrative has at most 25 uncertain facts, with possible-worlds
 * enumeration. Returns PROBEC_ERR_MISMATCH if any probability differs by
 * more than tolerance. */
typedef struct probec_validation {
  double max_error_exact;
  double max_error_enumeration;
  int enumeration_checked;
  size_t atoms;
  size_t frames;
} probec_validation;

PROBEC_API probec_status probec_validate(const probec_rules* rules, const probec_narrative* n,
                                         double tolerance, probec_validation* out);

/* ---- evaluation ------------------------------------------------------- */

typedef struct probec_metrics {
  size_t tp, fp, fn;
  double precision, recall, fmeasure;
} probec_metrics;

PROBEC_API void probec_metrics_from_counts(size_t tp, size_t fp, size_t fn, probec_metrics* out);

PROBEC_API probec_status probec_truth_load(const char* path, probec_truth** out);
PROBEC_API probec_status probec_truth_parse(const char* text, probec_truth** out);
PROBEC_API void probec_truth_free(probec_truth* t);

/* Scores a recognitions CSV against ground truth. Writes the CSV
 * fluent,tp,fp,fn,precision,recall,fmeasure. */
PROBEC_API probec_status probec_eval(const char* recognitions_csv, const probec_truth* truth, char** out);

typedef struct probec_sweep_config {
  const probec_noise_level* levels;
  size_t level_count;
  const double* means;
  size_t mean_count;
  const double* thresholds;
  size_t threshold_count;
  int runs;
  uint64_t seed;
  double spurious_fraction;
  /* 0 uses every hardware thread. */
  unsigned threads;
} probec_sweep_config;

/* Either output may be NULL when not wanted. */
PROBEC_API probec_status probec_sweep(const probec_rules* rules, const probec_narrative* clean,
                                      const probec_truth* truth, const probec_sweep_config* cfg,
                                      char** runs_csv, char** summary_csv);

#ifdef __cplusplus
}
#endif

#endif /* PROBEC_H */
