/*
 * C API for the aka lifelong re-identification library.
 *
 * All entry points return aka_status; on failure aka_last_error() holds a
 * human-readable message for the calling thread. Handles are opaque and must
 * be released with their _close function.
 */
#ifndef AKA_H
#define AKA_H

#include <stddef.h>

#if defined(_WIN32)
#define AKA_API __declspec(dllexport)
#else
#define AKA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aka_status {
    AKA_OK = 0,
    AKA_ERR_INVALID_ARGUMENT = 1, /* bad handle / null pointer / bad value */
    AKA_ERR_CONFIG = 2,           /* unusable configuration or inputs */
    AKA_ERR_RUNTIME = 3           /* failure while executing */
} aka_status;

typedef struct aka_experiment aka_experiment; /* opaque */

AKA_API const char* aka_version(void);

/* Message for the last failing call on this thread; empty string if none. */
AKA_API const char* aka_last_error(void);

/* Loads an experiment configuration (JSON). */
AKA_API aka_status aka_experiment_open(const char* config_path, aka_experiment** out);

/* Overrides before running: keys "seed", "method", "out", "order". */
AKA_API aka_status aka_experiment_set(aka_experiment* exp, const char* key, const char* value);

/* Trains the full domain stream and writes all artifacts (config copy,
 * checkpoints, metrics.csv, losses.csv, diagnostics, plots). */
AKA_API aka_status aka_experiment_run(aka_experiment* exp);

/* Output directory the experiment resolved to (valid until close). */
AKA_API const char* aka_experiment_out_dir(const aka_experiment* exp);

AKA_API void aka_experiment_close(aka_experiment* exp);

/* Method-comparison table + forgetting/generalization plots from finished
 * run directories. */
AKA_API aka_status aka_compare(const char* const* run_dirs, size_t count, const char* out_dir);

/* Cosine-similarity heatmaps from a run's diagnostic dumps. */
AKA_API aka_status aka_diagnose(const char* run_dir, const char* out_dir);

typedef struct aka_eval_result {
    double mean_ap;
    double rank1;
    int valid_queries;
    int skipped_queries;
} aka_eval_result;

/* Evaluates a checkpoint on a query/gallery CSV pair.
 * enhance: 1 = graph-enhanced embedding, 0 or -1 = backbone features (the
 * protocol used during training). */
AKA_API aka_status aka_evaluate_checkpoint(const char* checkpoint_path, const char* query_csv,
                                           const char* gallery_csv, int enhance,
                                           aka_eval_result* out);

#ifdef __cplusplus
}
#endif

#endif /* AKA_H */
