#include "erp/erp.h"

#include <new>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/eval.hpp"
#include "core/pipeline.hpp"
#include "core/ridge.hpp"
#include "core/router.hpp"
#include "core/scoring.hpp"

struct erp_pool {
    erp::ModelPool pool;
};

struct erp_predictor {
    erp::LinearPredictor predictor;
};

struct erp_router {
    erp::Router router;
};

namespace {

thread_local std::string g_last_error;

erp_status fail(erp_status s, std::string msg) {
    g_last_error = std::move(msg);
    return s;
}

// Runs fn, translating exceptions into status codes.
template <typename Fn>
erp_status guarded(Fn&& fn) noexcept {
    try {
        g_last_error.clear();
        fn();
        return ERP_OK;
    } catch (const erp::Error& e) {
        return fail(static_cast<erp_status>(e.kind()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(ERP_ERR_NUMERIC, "out of memory");
    } catch (const std::exception& e) {
        return fail(ERP_ERR_NUMERIC, std::string("internal error: ") + e.what());
    } catch (...) {
        return fail(ERP_ERR_NUMERIC, "unknown internal error");
    }
}

std::string required(const char* s, const char* what) {
    if (!s || !*s) throw erp::UsageError(std::string("missing ") + what);
    return s;
}

erp::pipeline::EvalInputs eval_inputs(const char* prompts, const char* rewards, const char* pool,
                                      const char* predictors_dir, const char* split) {
    erp::pipeline::EvalInputs in;
    in.prompts = required(prompts, "prompts path");
    in.rewards = required(rewards, "rewards path");
    in.pool = required(pool, "pool path");
    in.predictors_dir = required(predictors_dir, "predictors directory");
    if (split && *split) in.split = split;
    return in;
}

}  // namespace

extern "C" {

const char* erp_version(void) { return "1.0.0"; }

const char* erp_last_error(void) { return g_last_error.c_str(); }

erp_status erp_pool_load(const char* path, erp_pool** out) {
    return guarded([&] {
        if (!out) throw erp::UsageError("null output handle");
        *out = new erp_pool{erp::load_pool(required(path, "pool path"))};
    });
}

void erp_pool_free(erp_pool* pool) { delete pool; }

size_t erp_pool_size(const erp_pool* pool) { return pool ? pool->pool.size() : 0; }

const char* erp_pool_model_id(const erp_pool* pool, size_t index) {
    if (!pool || index >= pool->pool.size()) return nullptr;
    return pool->pool.id(index).c_str();
}

double erp_pool_cost(const erp_pool* pool, size_t index) {
    if (!pool || index >= pool->pool.size()) return 0.0;
    return pool->pool.cost(index);
}

erp_status erp_predictor_load(const char* path, erp_predictor** out) {
    return guarded([&] {
        if (!out) throw erp::UsageError("null output handle");
        *out = new erp_predictor{erp::load_predictor(required(path, "predictor path"))};
    });
}

void erp_predictor_free(erp_predictor* predictor) { delete predictor; }

size_t erp_predictor_dim(const erp_predictor* predictor) { return predictor ? predictor->predictor.dim() : 0; }

const char* erp_predictor_model_id(const erp_predictor* predictor) {
    return predictor ? predictor->predictor.model_id.c_str() : nullptr;
}

erp_status erp_predictor_predict(const erp_predictor* predictor, const double* embedding, size_t dim, double* out) {
    return guarded([&] {
        if (!predictor || !out || (!embedding && dim > 0)) throw erp::UsageError("null argument");
        const Eigen::Map<const erp::Vector> x(embedding, static_cast<Eigen::Index>(dim));
        *out = erp::predict(predictor->predictor, x);
    });
}

erp_status erp_router_load(const char* predictors_dir, const char* pool_path, erp_router** out) {
    return guarded([&] {
        if (!out) throw erp::UsageError("null output handle");
        *out = new erp_router{
            erp::Router::load(required(predictors_dir, "predictors directory"), required(pool_path, "pool path"))};
    });
}

void erp_router_free(erp_router* router) { delete router; }

size_t erp_router_dim(const erp_router* router) { return router ? router->router.dim() : 0; }

size_t erp_router_num_models(const erp_router* router) { return router ? router->router.pool().size() : 0; }

const char* erp_router_model_id(const erp_router* router, size_t index) {
    if (!router || index >= router->router.pool().size()) return nullptr;
    return router->router.pool().id(index).c_str();
}

double erp_router_cost(const erp_router* router, size_t index) {
    if (!router || index >= router->router.pool().size()) return 0.0;
    return router->router.pool().cost(index);
}

erp_status erp_router_route(const erp_router* router, const double* embedding, size_t dim, double lambda,
                            size_t* chosen, double* predicted, double* adjusted) {
    return guarded([&] {
        if (!router || !chosen || (!embedding && dim > 0)) throw erp::UsageError("null argument");
        const Eigen::Map<const erp::Vector> x(embedding, static_cast<Eigen::Index>(dim));
        const erp::RouteDecision d = router->router.route(x, lambda);
        *chosen = d.chosen;
        for (std::size_t j = 0; j < d.predicted.size(); ++j) {
            if (predicted) predicted[j] = d.predicted[j];
            if (adjusted) adjusted[j] = d.adjusted[j];
        }
    });
}

erp_status erp_empirical_er(const double* rewards, size_t count, double* out) {
    return guarded([&] {
        if (!out || (!rewards && count > 0)) throw erp::UsageError("null argument");
        *out = erp::empirical_er(std::span<const double>(rewards, count));
    });
}

erp_status erp_auroc(const double* scores, const unsigned char* labels, size_t count, double* out) {
    return guarded([&] {
        if (!out || ((!scores || !labels) && count > 0)) throw erp::UsageError("null argument");
        std::vector<bool> l(labels, labels + count);
        *out = erp::auroc(std::span<const double>(scores, count), l);
    });
}

erp_status erp_prop1_bound(double er_gap, double sigma, double* out) {
    return guarded([&] {
        if (!out) throw erp::UsageError("null argument");
        *out = erp::prop1_bound(er_gap, sigma);
    });
}

erp_status erp_prop1_monte_carlo(double mu0, double mu1, double sigma, uint64_t n, uint64_t seed,
                                 erp_reward_family family, erp_prop1_result* out) {
    return guarded([&] {
        if (!out) throw erp::UsageError("null argument");
        const auto r = erp::prop1_monte_carlo(
            mu0, mu1, sigma, n, seed,
            family == ERP_FAMILY_BOUNDED ? erp::RewardFamily::Bounded : erp::RewardFamily::Gaussian);
        *out = erp_prop1_result{r.empirical, r.bound, r.slack, r.satisfied ? 1 : 0};
    });
}

erp_synth_config erp_synth_config_default(void) {
    const erp::SynthConfig c;
    return erp_synth_config{c.n_categories,       c.prompts_per_category, c.dim,  c.n_models,
                            c.samples_per_prompt, c.noise_sigma,          c.cluster_spread, c.seed};
}

erp_status erp_run_synth(const erp_synth_config* config, const char* out_dir) {
    return guarded([&] {
        if (!config) throw erp::UsageError("null config");
        erp::pipeline::SynthOptions o;
        o.config = erp::SynthConfig{config->n_categories,       config->prompts_per_category, config->dim,
                                    config->n_models,           config->samples_per_prompt,   config->noise_sigma,
                                    config->cluster_spread,     config->seed};
        o.out_dir = required(out_dir, "output directory");
        erp::pipeline::run_synth(o);
    });
}

erp_train_options erp_train_options_default(void) {
    return erp_train_options{nullptr, nullptr, nullptr, nullptr, 0, erp::kDefaultBeta, 0.5};
}

erp_status erp_run_train(const erp_train_options* options) {
    return guarded([&] {
        if (!options) throw erp::UsageError("null options");
        erp::pipeline::TrainOptions o;
        o.prompts = required(options->prompts_path, "prompts path");
        o.rewards = required(options->rewards_path, "rewards path");
        o.pool = required(options->pool_path, "pool path");
        o.out_dir = required(options->out_dir, "output directory");
        o.seed = options->seed;
        o.beta = options->beta;
        o.train_fraction = options->train_fraction;
        erp::pipeline::run_train(o);
    });
}

erp_eval_options erp_eval_options_default(void) {
    return erp_eval_options{nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, 0, ERP_LABEL_SAMPLE};
}

erp_status erp_run_eval(const erp_eval_options* options) {
    return guarded([&] {
        if (!options) throw erp::UsageError("null options");
        erp::pipeline::EvalOptions o;
        o.inputs = eval_inputs(options->prompts_path, options->rewards_path, options->pool_path,
                               options->predictors_dir, options->split_path);
        o.out_dir = required(options->out_dir, "output directory");
        o.seed = options->seed;
        o.label_mode = options->label_mode == ERP_LABEL_MEAN ? erp::LabelMode::Mean : erp::LabelMode::Sample;
        erp::pipeline::run_eval(o);
    });
}

erp_sweep_options erp_sweep_options_default(void) {
    return erp_sweep_options{nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, 0,
                             "auto",  "all",   1.0,     1e-5,    ERP_ZOOTER_MEAN};
}

erp_status erp_run_sweep(const erp_sweep_options* options) {
    return guarded([&] {
        if (!options) throw erp::UsageError("null options");
        erp::pipeline::SweepOptions o;
        o.inputs = eval_inputs(options->prompts_path, options->rewards_path, options->pool_path,
                               options->predictors_dir, options->split_path);
        o.out_dir = required(options->out_dir, "output directory");
        o.seed = options->seed;
        o.lambdas = erp::pipeline::parse_lambda_grid(options->lambda_grid ? options->lambda_grid : "auto");
        o.policies = erp::pipeline::parse_policies(options->policies ? options->policies : "all");
        if (!(options->zooter_temperature > 0.0)) throw erp::UsageError("zooter temperature must be positive");
        if (!(options->zooter_l2 >= 0.0)) throw erp::UsageError("zooter l2 must be non-negative");
        o.zooter_temperature = options->zooter_temperature;
        o.zooter_l2 = options->zooter_l2;
        o.zooter_targets =
            options->zooter_targets == ERP_ZOOTER_SAMPLE ? erp::pipeline::ZooterTargets::Sample
                                                         : erp::pipeline::ZooterTargets::Mean;
        erp::pipeline::run_sweep(o);
    });
}

}  // extern "C"
