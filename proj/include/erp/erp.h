/*
 * liberp: expected-reward prediction and cost-aware model routing.
 *
 * C interface over the C++ core. All objects are opaque handles created by
 * erp_*_load / erp_*_create and released by the matching erp_*_free. Every
 * fallible call returns an erp_status; on failure a message describing the
 * last error on the calling thread is available from erp_last_error().
 *
 * Handles are immutable after creation and may be shared across threads.
 */
#ifndef ERP_ERP_H
#define ERP_ERP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ERP_BUILDING_LIBRARY)
#    define ERP_API __declspec(dllexport)
#  else
#    define ERP_API __declspec(dllimport)
#  endif
#else
#  define ERP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum erp_status {
    ERP_OK = 0,
    ERP_ERR_USAGE = 1,     /* invalid argument or configuration */
    ERP_ERR_DATA = 2,      /* malformed, inconsistent or unreadable data; I/O */
    ERP_ERR_NUMERIC = 3    /* singular system, non-convergence, overflow */
} erp_status;

typedef enum erp_label_mode {
    ERP_LABEL_SAMPLE = 0, /* one seeded draw per model */
    ERP_LABEL_MEAN = 1    /* compare empirical means */
} erp_label_mode;

typedef enum erp_reward_family {
    ERP_FAMILY_GAUSSIAN = 0,
    ERP_FAMILY_BOUNDED = 1
} erp_reward_family;

typedef enum erp_zooter_targets {
    ERP_ZOOTER_MEAN = 0,
    ERP_ZOOTER_SAMPLE = 1
} erp_zooter_targets;

ERP_API const char* erp_version(void);

/* Message for the most recent failure on this thread ("" if none). */
ERP_API const char* erp_last_error(void);

/* ---- model pool ------------------------------------------------------- */

typedef struct erp_pool erp_pool;

ERP_API erp_status erp_pool_load(const char* path, erp_pool** out);
ERP_API void erp_pool_free(erp_pool* pool);
ERP_API size_t erp_pool_size(const erp_pool* pool);
/* Borrowed string, valid while the pool lives. NULL if out of range. */
ERP_API const char* erp_pool_model_id(const erp_pool* pool, size_t index);
ERP_API double erp_pool_cost(const erp_pool* pool, size_t index);

/* ---- single predictor ------------------------------------------------- */

typedef struct erp_predictor erp_predictor;

ERP_API erp_status erp_predictor_load(const char* path, erp_predictor** out);
ERP_API void erp_predictor_free(erp_predictor* predictor);
ERP_API size_t erp_predictor_dim(const erp_predictor* predictor);
ERP_API const char* erp_predictor_model_id(const erp_predictor* predictor);
ERP_API erp_status erp_predictor_predict(const erp_predictor* predictor, const double* embedding, size_t dim,
                                         double* out);

/* ---- router: one predictor per pool model ----------------------------- */

typedef struct erp_router erp_router;

/* Loads <predictors_dir>/predictor_<model>.json for every model of the pool.
 * All predictor dimensions must agree. */
ERP_API erp_status erp_router_load(const char* predictors_dir, const char* pool_path, erp_router** out);
ERP_API void erp_router_free(erp_router* router);
ERP_API size_t erp_router_dim(const erp_router* router);
ERP_API size_t erp_router_num_models(const erp_router* router);
ERP_API const char* erp_router_model_id(const erp_router* router, size_t index);
ERP_API double erp_router_cost(const erp_router* router, size_t index);

/* Cost-adjusted routing decision for one embedding. `predicted` and
 * `adjusted` may be NULL; otherwise they receive num_models values
 * (predicted ER and predicted ER - lambda * cost, in pool order). */
ERP_API erp_status erp_router_route(const erp_router* router, const double* embedding, size_t dim, double lambda,
                                    size_t* chosen, double* predicted, double* adjusted);

/* ---- primitives ------------------------------------------------------- */

ERP_API erp_status erp_empirical_er(const double* rewards, size_t count, double* out);
ERP_API erp_status erp_auroc(const double* scores, const unsigned char* labels, size_t count, double* out);
ERP_API erp_status erp_prop1_bound(double er_gap, double sigma, double* out);

typedef struct erp_prop1_result {
    double empirical;
    double bound;
    double slack;
    int satisfied;
} erp_prop1_result;

ERP_API erp_status erp_prop1_monte_carlo(double mu0, double mu1, double sigma, uint64_t n, uint64_t seed,
                                         erp_reward_family family, erp_prop1_result* out);

/* ---- pipeline subcommands --------------------------------------------- */

typedef struct erp_synth_config {
    size_t n_categories;
    size_t prompts_per_category;
    size_t dim;
    size_t n_models;
    size_t samples_per_prompt;
    double noise_sigma;
    double cluster_spread;
    uint64_t seed;
} erp_synth_config;

ERP_API erp_synth_config erp_synth_config_default(void);
ERP_API erp_status erp_run_synth(const erp_synth_config* config, const char* out_dir);

typedef struct erp_train_options {
    const char* prompts_path;
    const char* rewards_path;
    const char* pool_path;
    const char* out_dir;
    uint64_t seed;
    double beta;
    double train_fraction;
} erp_train_options;

ERP_API erp_train_options erp_train_options_default(void);
ERP_API erp_status erp_run_train(const erp_train_options* options);

typedef struct erp_eval_options {
    const char* prompts_path;
    const char* rewards_path;
    const char* pool_path;
    const char* predictors_dir;
    const char* split_path; /* NULL: <predictors_dir>/split.json */
    const char* out_dir;
    uint64_t seed;
    erp_label_mode label_mode;
} erp_eval_options;

ERP_API erp_eval_options erp_eval_options_default(void);
ERP_API erp_status erp_run_eval(const erp_eval_options* options);

typedef struct erp_sweep_options {
    const char* prompts_path;
    const char* rewards_path;
    const char* pool_path;
    const char* predictors_dir;
    const char* split_path; /* NULL: <predictors_dir>/split.json */
    const char* out_dir;
    uint64_t seed;
    const char* lambda_grid;   /* "auto" or comma list */
    const char* policies;      /* comma list of erp,zooter,fixed,random,permutation,oracle or "all" */
    double zooter_temperature;
    double zooter_l2;
    erp_zooter_targets zooter_targets;
} erp_sweep_options;

ERP_API erp_sweep_options erp_sweep_options_default(void);
ERP_API erp_status erp_run_sweep(const erp_sweep_options* options);

#ifdef __cplusplus
}
#endif

#endif /* ERP_ERP_H */
