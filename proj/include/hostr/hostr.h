#ifndef HOSTR_H
#define HOSTR_H

/* C interface to the HOSTR library: hierarchical object-oriented
 * spatio-temporal reasoning for video question answering over synthetic
 * trajectory corpora. All functions return a status code; on failure
 * hostr_last_error() describes the problem for the calling thread. Strings
 * returned through char** are heap-allocated; release them with
 * hostr_string_free(). Configs travel as JSON text whose keys mirror the
 * library config structs one-to-one. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hostr_status {
    HOSTR_OK = 0,
    HOSTR_ERR_NULL_ARGUMENT = 1,
    HOSTR_ERR_INVALID_ARGUMENT = 2,
    HOSTR_ERR_RUNTIME = 3
} hostr_status;

const char* hostr_status_name(hostr_status status);

/* Message from the most recent failing call on this thread; never NULL. */
const char* hostr_last_error(void);

void hostr_string_free(char* s);

typedef struct hostr_corpus hostr_corpus;
typedef struct hostr_model hostr_model;

/* Synthesizes a corpus into out_dir. template_name is one of "attribute",
 * "interaction", "count". world_json optionally overrides world parameters
 * (objects_n, length, frame_w, frame_h, d_app, d_g, d_motion, p_occlusion,
 * sigma_noise, programs); NULL or "" keeps the template defaults. */
hostr_status hostr_generate(const char* template_name, const char* world_json,
                            int n_train, int n_val, int n_test, uint64_t seed,
                            const char* out_dir);

hostr_status hostr_corpus_open(const char* dir, hostr_corpus** out);
void hostr_corpus_close(hostr_corpus* corpus);
hostr_status hostr_corpus_manifest_json(const hostr_corpus* corpus, char** out);
hostr_status hostr_corpus_split_size(const hostr_corpus* corpus, const char* split,
                                     int* out);

/* config_json keys mirror the model config; missing keys keep defaults. */
hostr_status hostr_model_create(const char* config_json, uint64_t seed, hostr_model** out);
hostr_status hostr_model_load(const char* checkpoint_path, hostr_model** out);
hostr_status hostr_model_save(const hostr_model* model, const char* checkpoint_path);
void hostr_model_close(hostr_model* model);
hostr_status hostr_model_config_json(const hostr_model* model, char** out);

/* Trains on the corpus. The model starts from defaults adapted to the corpus
 * manifest, overridden by model_config_json; train_config_json likewise
 * overrides the task's training defaults (NULL or "" keeps them). Writes a
 * checkpoint when checkpoint_path is non-NULL. The run report lands in
 * report_json_out when it is non-NULL. */
hostr_status hostr_train(const hostr_corpus* corpus, const char* model_config_json,
                         const char* train_config_json, const char* checkpoint_path,
                         char** report_json_out);

/* metric is accuracy for classification, MSE for count; secondary is mean
 * loss for classification, rounded-prediction accuracy for count.
 * threads <= 0 reads the HOSTR_THREADS environment variable (default 1). */
hostr_status hostr_evaluate(const hostr_model* model, const hostr_corpus* corpus,
                            const char* split, int threads, double* metric_out,
                            double* secondary_out);

/* Reasoning-trace JSON for one episode ("split/nnnnnn"); top_k <= 0 means 6. */
hostr_status hostr_inspect(const hostr_model* model, const hostr_corpus* corpus,
                           const char* episode_id, int top_k, char** trace_json_out);

/* Trains every standard ablation variant; returns the comparison table. */
hostr_status hostr_ablate(const hostr_corpus* corpus, const char* model_config_json,
                          const char* train_config_json, char** table_json_out);

/* Central finite-difference check of the full model gradient at reduced
 * dimensions. pass_out is 1 when the max relative error is below tolerance. */
hostr_status hostr_gradcheck(int d, int n_objects, int clip_count, int clip_length,
                             int gcn_layers, int answer_vocab, double step,
                             double tolerance, int* pass_out, char** report_json_out);

#ifdef __cplusplus
}
#endif

#endif /* HOSTR_H */
