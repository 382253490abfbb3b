/* neurograph C API
 *
 * Shared-library surface over the channel-graph classification pipeline:
 * opaque handles, integer status codes, thread-local error messages. All
 * functions returning a pointer yield NULL on failure; all functions
 * returning ng_status yield NG_OK (0) on success. ng_last_error() describes
 * the most recent failure on the calling thread.
 */
#ifndef NEUROGRAPH_H
#define NEUROGRAPH_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ng_status {
  NG_OK = 0,
  NG_ERR_INVALID = 2, /* bad arguments, malformed input, contract violation */
  NG_ERR_NUMERIC = 3, /* NaN loss, divergence, degenerate spectrum */
  NG_ERR_IO = 4       /* missing, truncated or unwritable files */
} ng_status;

const char* ng_version(void);
/* Message for the last failure on this thread; never NULL. */
const char* ng_last_error(void);

/* ----- configuration (flat key=value schema) ----- */
typedef struct ng_config ng_config;

ng_config* ng_config_default(void);
ng_config* ng_config_read(const char* path);
ng_status ng_config_set(ng_config* cfg, const char* key, const char* value);
/* Canonical text. Returns required byte count (including the trailing NUL)
 * via *needed; copies into buf when buf_len suffices. */
ng_status ng_config_dump(const ng_config* cfg, char* buf, size_t buf_len,
                         size_t* needed);
void ng_config_destroy(ng_config* cfg);

/* ----- datasets ----- */
typedef struct ng_dataset ng_dataset;

/* Synthetic epochs per the synth.* keys and the seed. */
ng_dataset* ng_dataset_generate(const ng_config* cfg);
ng_dataset* ng_dataset_read(const char* path);          /* NGEP container */
ng_dataset* ng_dataset_read_csv(const char* path, const char* layout_path,
                                double fs);
ng_status ng_dataset_write(const ng_dataset* ds, const char* path);
/* Funnel/margin exclusion plus majority-class pruning; new handle. */
ng_dataset* ng_dataset_balance(const ng_dataset* ds, double funnel_halfwidth_deg,
                               double margin_deg, int per_participant);
long ng_dataset_count(const ng_dataset* ds);
void ng_dataset_destroy(ng_dataset* ds);

/* ----- pipeline entry points ----- */

/* 10-fold (train.folds) cross-validation; writes metrics.csv plus per-fold
 * history and checkpoints under out_dir. pretrain_ckpt may be NULL.
 * mean_accuracy may be NULL. */
ng_status ng_run_crossval(const ng_dataset* ds, const ng_config* cfg,
                          const char* pretrain_ckpt, const char* out_dir,
                          int force, int jobs, double* mean_accuracy);

/* Trains on the two groups opposite exclude_group ("round" or "pocket"
 * scheme) and writes an NGRF checkpoint. */
ng_status ng_run_pretrain(const ng_dataset* ds, const ng_config* cfg,
                          const char* exclude_group, const char* scheme,
                          const char* out_ckpt);

/* Mask explanation of one checkpoint over ds; writes <stem>.map.csv,
 * <stem>.map.svg, <stem>.loss.csv under out_dir. */
ng_status ng_run_explain(const char* model_ckpt, const ng_dataset* ds,
                         const ng_config* cfg, const char* out_dir);

/* Sliced-distance matrix (and, for <Group>_<scheme>_<stage> named inputs,
 * the grouping table and the nonparametric tests) over map CSVs. */
ng_status ng_run_compare_maps(const char* const* map_csv_paths, size_t n,
                              const ng_config* cfg, const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* NEUROGRAPH_H */
