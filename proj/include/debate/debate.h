#ifndef DEBATE_DEBATE_H
#define DEBATE_DEBATE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DEBATE_BUILDING_LIBRARY)
#    define DBK_API __declspec(dllexport)
#  else
#    define DBK_API __declspec(dllimport)
#  endif
#else
#  define DBK_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dbk_status {
    DBK_OK = 0,
    DBK_ERR_INVALID_ARGUMENT = 1,
    DBK_ERR_CONFIG = 2,
    DBK_ERR_PARSE = 3,
    DBK_ERR_BACKEND = 4,
    DBK_ERR_ENGINE = 5,
    DBK_ERR_IO = 6,
    DBK_ERR_ILLEGAL_MOVE = 7,
    DBK_ERR_BUFFER_TOO_SMALL = 8,
    DBK_ERR_INTERNAL = 99
} dbk_status;

typedef struct dbk_experiment dbk_experiment;
typedef struct dbk_result dbk_result;

DBK_API const char* dbk_version(void);
DBK_API const char* dbk_status_string(dbk_status status);

/* Message of the last failed call on this thread, or "" after a success. */
DBK_API const char* dbk_last_error(void);

/* "trace", "debug", "info", "warn", "error" or "off". */
DBK_API dbk_status dbk_set_log_level(const char* level);

/* Experiments. base_dir resolves relative paths in the spec; NULL means ".". */
DBK_API dbk_status dbk_experiment_from_json(const char* spec_json, const char* base_dir, dbk_experiment** out);
DBK_API dbk_status dbk_experiment_load(const char* path, dbk_experiment** out);
DBK_API void dbk_experiment_free(dbk_experiment* exp);
DBK_API dbk_status dbk_experiment_set_output_dir(dbk_experiment* exp, const char* dir);
DBK_API dbk_status dbk_experiment_set_resume(dbk_experiment* exp, int resume);
DBK_API dbk_status dbk_experiment_set_parallelism(dbk_experiment* exp, int parallelism);
/* Fully resolved spec as JSON; owned by the experiment. */
DBK_API const char* dbk_experiment_spec_json(dbk_experiment* exp);

DBK_API dbk_status dbk_run(dbk_experiment* exp, dbk_result** out);
DBK_API dbk_status dbk_sweep(dbk_experiment* exp, dbk_result** out);
DBK_API dbk_status dbk_score(dbk_experiment* exp, const char* transcripts_path, dbk_result** out);
DBK_API dbk_status dbk_report(const char* const* results_paths, size_t count, const char* out_dir, dbk_result** out);

/* Results. The JSON text stays valid until dbk_result_free. */
DBK_API const char* dbk_result_json(const dbk_result* result);
DBK_API dbk_status dbk_result_aggregate(const dbk_result* result, double* mean, double* se, int* n);
DBK_API void dbk_result_free(dbk_result* result);

DBK_API dbk_status dbk_fetch(const char* url, const char* dest);

/* Utilities. String outputs are NUL-terminated into buf; *needed (if not
   NULL) receives the required size including the terminator. */
DBK_API dbk_status dbk_extract(const char* task_kind, const char* text, char* buf, size_t cap, size_t* needed);
DBK_API dbk_status dbk_eval_expression(const int64_t operands[6], int64_t* out);
DBK_API dbk_status dbk_perft(const char* fen, int depth, uint64_t* out);
/* san_prefix: space-separated SAN moves from the start position. */
DBK_API dbk_status dbk_check_move(const char* san_prefix, const char* move, int* legal, char* uci_buf, size_t cap);

#ifdef __cplusplus
}
#endif

#endif
