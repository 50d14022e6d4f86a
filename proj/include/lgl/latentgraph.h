/* C interface to the latent-graph learning engine.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Every fallible call returns an lgl_status; on failure lgl_last_error()
 * describes the problem for the calling thread until its next failing call.
 */
#ifndef LGL_LATENTGRAPH_H
#define LGL_LATENTGRAPH_H

#include <stddef.h>
#include <stdint.h>

#if defined(LGL_BUILDING_LIBRARY)
#define LGL_API __attribute__((visibility("default")))
#else
#define LGL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lgl_status {
  LGL_OK = 0,
  LGL_ERR_INVALID_ARGUMENT = 1, /* bad handle, key, value or contract */
  LGL_ERR_DIMENSION = 2,
  LGL_ERR_IO = 3,
  LGL_ERR_PARSE = 4,
  LGL_ERR_NUMERICAL = 5, /* divergence, NaN, zero degree */
  LGL_ERR_INTERNAL = 6
} lgl_status;

typedef struct lgl_config lgl_config;
typedef struct lgl_dataset lgl_dataset;
typedef struct lgl_model lgl_model;

LGL_API const char* lgl_version(void);
LGL_API const char* lgl_status_name(lgl_status status);
/* Never NULL; empty when the thread has not failed yet. */
LGL_API const char* lgl_last_error(void);

/* ---- configuration ------------------------------------------------------
 * Integer keys: epochs, lr_step, lr_decays, seed, folds, standardize (0/1),
 *   embed_dim, knn_k, workers (0 = LGL_WORKERS or hardware),
 *   iterations (graph recovery)
 * Real keys: lr0, lr_min, beta1, beta2, adam_eps, ridge_lambda,
 *   edge_probability (graph recovery)
 * List keys: embed_hidden, gc_widths, recovery_hidden
 */
LGL_API lgl_status lgl_config_create(lgl_config** out);
LGL_API void lgl_config_destroy(lgl_config* cfg);
LGL_API lgl_status lgl_config_set_int(lgl_config* cfg, const char* key, int64_t value);
LGL_API lgl_status lgl_config_get_int(const lgl_config* cfg, const char* key, int64_t* value);
LGL_API lgl_status lgl_config_set_real(lgl_config* cfg, const char* key, double value);
LGL_API lgl_status lgl_config_get_real(const lgl_config* cfg, const char* key, double* value);
/* An empty list (count 0) is allowed for embed_hidden and recovery_hidden. */
LGL_API lgl_status lgl_config_set_list(lgl_config* cfg, const char* key, const size_t* values,
                                       size_t count);

/* ---- datasets ----------------------------------------------------------- */

/* label_col NULL or "" loads an unlabeled table. features NULL (or count 0)
 * takes every column other than the id and label columns. id_col NULL or ""
 * numbers the rows from 0. */
LGL_API lgl_status lgl_dataset_load_csv(const char* path, const char* id_col,
                                        const char* label_col, const char* const* features,
                                        size_t feature_count, lgl_dataset** out);
/* Row-major n x d features and labels in [0, num_classes). */
LGL_API lgl_status lgl_dataset_create(const double* features, size_t n, size_t d,
                                      const int* labels, size_t num_classes, lgl_dataset** out);
/* The 300-node, 3-class clustered benchmark (10 informative and 90 nuisance
 * columns) drawn from `seed`. */
LGL_API lgl_status lgl_dataset_benchmark(uint64_t seed, lgl_dataset** out);
LGL_API lgl_status lgl_dataset_save_csv(const lgl_dataset* data, const char* path);
LGL_API void lgl_dataset_destroy(lgl_dataset* data);
LGL_API size_t lgl_dataset_rows(const lgl_dataset* data);
LGL_API size_t lgl_dataset_cols(const lgl_dataset* data);
/* 0 for unlabeled tables. */
LGL_API size_t lgl_dataset_classes(const lgl_dataset* data);
/* Rows dropped for a missing label and feature cells imputed at load time. */
LGL_API size_t lgl_dataset_dropped_rows(const lgl_dataset* data);
LGL_API size_t lgl_dataset_imputed_cells(const lgl_dataset* data);

/* ---- training and inference --------------------------------------------- */

/* Trains on every row. history_csv (may be NULL) receives
 * epoch,lr,loss,train_acc,val_acc per epoch. */
LGL_API lgl_status lgl_train(const lgl_dataset* data, const lgl_config* cfg,
                             const char* history_csv, lgl_model** out);
/* JSON model file; it keeps the training features so that unseen rows can
 * later be placed in a graph with them. */
LGL_API lgl_status lgl_model_save(const lgl_model* model, const char* path);
LGL_API lgl_status lgl_model_load(const char* path, lgl_model** out);
LGL_API void lgl_model_destroy(lgl_model* model);
LGL_API size_t lgl_model_classes(const lgl_model* model);
LGL_API size_t lgl_model_features(const lgl_model* model);
/* Name of feature column i, NULL when out of range. */
LGL_API const char* lgl_model_feature_name(const lgl_model* model, size_t i);
LGL_API double lgl_model_temperature(const lgl_model* model);
LGL_API double lgl_model_threshold(const lgl_model* model);

/* Inductive inference: builds the graph over the training rows stored in the
 * model plus the rows of `data` (matched by the model's feature names when
 * `data` was loaded from CSV, by position otherwise) and writes predictions.
 * `labels` holds rows(data) entries, `probabilities` (may be NULL)
 * rows(data) x classes, row-major. */
LGL_API lgl_status lgl_infer(const lgl_model* model, const lgl_dataset* data, int* labels,
                             double* probabilities);
/* Writes predictions as CSV: id,predicted,p_<class>... */
LGL_API lgl_status lgl_infer_csv(const lgl_model* model, const lgl_dataset* data,
                                 const char* path);
/* Learned adjacency over the training rows (data NULL) or over the rows of
 * `data`, as a CSV with node ids in the header and first column. */
LGL_API lgl_status lgl_export_graph(const lgl_model* model, const lgl_dataset* data,
                                    const char* path);

/* ---- workflows ---------------------------------------------------------- */

typedef struct lgl_cv_summary {
  double accuracy_mean;
  double accuracy_std;
  double auc_mean; /* NaN when no fold had a defined AUC */
  double auc_std;
  size_t folds;
} lgl_cv_summary;

/* method: "latent" (transductive), "inductive", "linear" or "knn".
 * With out_dir set, writes metrics.json and history_fold<k>.csv there. */
LGL_API lgl_status lgl_cross_validate(const lgl_dataset* data, const lgl_config* cfg,
                                      const char* method, const char* out_dir,
                                      lgl_cv_summary* summary);

typedef struct lgl_recovery_summary {
  double final_mse;
  double agreement;
  double temperature;
  double threshold;
  size_t edges;
} lgl_recovery_summary;

/* Draws G(nodes, edge_probability) from the seed and fits the graph module
 * with identity features. With out_dir set, writes ground_truth.csv,
 * learned.csv and loss.csv there. */
LGL_API lgl_status lgl_synth_recover(size_t nodes, size_t embed_dim, const lgl_config* cfg,
                                     const char* out_dir, lgl_recovery_summary* summary);

/* One recovery per (node count, dim, seed in [seed, seed + seeds)); writes
 * recovery_runs.csv and recovery_summary.csv to out_dir. */
LGL_API lgl_status lgl_synth_curves(const size_t* node_counts, size_t node_count_len,
                                    const size_t* dims, size_t dims_len, size_t seeds,
                                    const lgl_config* cfg, const char* out_dir);

/* Central-difference check of every op and of the classifier loss.
 * worst_op and end_to_end receive maximum relative errors. */
LGL_API lgl_status lgl_gradcheck(uint64_t seed, size_t instances, double* worst_op,
                                 double* end_to_end);

#ifdef __cplusplus
}
#endif

#endif /* LGL_LATENTGRAPH_H */
