#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "erp/erp.h"
#include "unit/support.hpp"

using erp::testing::TempDir;

namespace {

void build_workspace(const TempDir& dir, size_t models) {
    erp_synth_config cfg = erp_synth_config_default();
    cfg.n_categories = 2;
    cfg.prompts_per_category = 30;
    cfg.dim = 5;
    cfg.n_models = models;
    cfg.samples_per_prompt = 4;
    REQUIRE(erp_run_synth(&cfg, (dir / "data").c_str()) == ERP_OK);

    const std::string prompts = dir / "data" / "prompts.jsonl", rewards = dir / "data" / "rewards.jsonl",
                      pool = dir / "data" / "pool.json", out = dir / "model";
    erp_train_options t = erp_train_options_default();
    t.prompts_path = prompts.c_str();
    t.rewards_path = rewards.c_str();
    t.pool_path = pool.c_str();
    t.out_dir = out.c_str();
    REQUIRE(erp_run_train(&t) == ERP_OK);
}

}  // namespace

TEST_CASE("primitive functions") {
    CHECK(std::string(erp_version()) == "1.0.0");

    const double rewards[] = {1.0, 0.2, 0.0};
    double er = 0;
    REQUIRE(erp_empirical_er(rewards, 3, &er) == ERP_OK);
    CHECK(er == 0.4);

    const double scores[] = {0.8, 0.6, 0.4, 0.2};
    const unsigned char labels[] = {1, 0, 1, 0};
    double auc = 0;
    REQUIRE(erp_auroc(scores, labels, 4, &auc) == ERP_OK);
    CHECK(auc == 0.75);

    const unsigned char all_pos[] = {1, 1, 1, 1};
    CHECK(erp_auroc(scores, all_pos, 4, &auc) == ERP_ERR_DATA);
    CHECK(std::string(erp_last_error()).find("auroc") != std::string::npos);

    double bound = 0;
    REQUIRE(erp_prop1_bound(2.0, 1.0, &bound) == ERP_OK);
    CHECK(bound == doctest::Approx(0.6321205588285577).epsilon(1e-15));
    CHECK(erp_prop1_bound(2.0, 0.0, &bound) == ERP_ERR_USAGE);

    erp_prop1_result r{};
    REQUIRE(erp_prop1_monte_carlo(0.0, 2.0, 1.0, 100000, 1, ERP_FAMILY_GAUSSIAN, &r) == ERP_OK);
    CHECK(r.satisfied == 1);
    CHECK(std::fabs(r.empirical - 0.9213503964748574) < 4 * std::sqrt(0.25 / 100000));
    CHECK(erp_prop1_monte_carlo(0.0, 2.0, 1.0, 0, 1, ERP_FAMILY_GAUSSIAN, &r) == ERP_ERR_USAGE);
    CHECK(erp_empirical_er(rewards, 3, nullptr) == ERP_ERR_USAGE);
}

TEST_CASE("pool, predictor and router handles") {
    TempDir dir;
    build_workspace(dir, 3);
    const std::string pool_path = dir / "data" / "pool.json";
    const std::string model_dir = dir / "model";

    erp_pool* pool = nullptr;
    REQUIRE(erp_pool_load(pool_path.c_str(), &pool) == ERP_OK);
    CHECK(erp_pool_size(pool) == 3);
    CHECK(std::string(erp_pool_model_id(pool, 0)) == "model-0");
    CHECK(erp_pool_cost(pool, 0) == 8.0);
    CHECK(erp_pool_model_id(pool, 3) == nullptr);

    erp_predictor* pred = nullptr;
    REQUIRE(erp_predictor_load((model_dir + "/predictor_model-1.json").c_str(), &pred) == ERP_OK);
    CHECK(erp_predictor_dim(pred) == 5);
    CHECK(std::string(erp_predictor_model_id(pred)) == "model-1");

    erp_router* router = nullptr;
    REQUIRE(erp_router_load(model_dir.c_str(), pool_path.c_str(), &router) == ERP_OK);
    CHECK(erp_router_dim(router) == 5);
    CHECK(erp_router_num_models(router) == 3);
    CHECK(erp_router_cost(router, 2) == erp_pool_cost(pool, 2));

    const double x[] = {0.3, -1.2, 0.5, 2.0, 0.0};
    size_t chosen = 99;
    double predicted[3], adjusted[3];
    REQUIRE(erp_router_route(router, x, 5, 0.0, &chosen, predicted, adjusted) == ERP_OK);
    double direct = 0;
    REQUIRE(erp_predictor_predict(pred, x, 5, &direct) == ERP_OK);
    CHECK(predicted[1] == direct);
    size_t best = 0;
    for (size_t j = 1; j < 3; ++j)
        if (predicted[j] > predicted[best]) best = j;
    CHECK(chosen == best);

    REQUIRE(erp_router_route(router, x, 5, 1e9, &chosen, predicted, adjusted) == ERP_OK);
    CHECK(chosen == 0);
    CHECK(adjusted[2] == predicted[2] - 1e9 * erp_router_cost(router, 2));

    CHECK(erp_router_route(router, x, 4, 0.0, &chosen, nullptr, nullptr) == ERP_ERR_DATA);
    CHECK(erp_router_route(router, x, 5, -1.0, &chosen, nullptr, nullptr) == ERP_ERR_USAGE);
    CHECK(erp_predictor_predict(pred, x, 2, &direct) == ERP_ERR_DATA);

    erp_router_free(router);
    erp_predictor_free(pred);
    erp_pool_free(pool);
}

TEST_CASE("load failures") {
    TempDir dir;
    erp_pool* pool = nullptr;
    CHECK(erp_pool_load((dir / "missing.json").c_str(), &pool) == ERP_ERR_DATA);
    CHECK(pool == nullptr);
    CHECK(erp_pool_load(nullptr, &pool) == ERP_ERR_USAGE);

    build_workspace(dir, 2);
    std::filesystem::remove(dir / "model" / "predictor_model-1.json");
    erp_router* router = nullptr;
    CHECK(erp_router_load((dir / "model").c_str(), (dir / "data" / "pool.json").c_str(), &router) == ERP_ERR_DATA);
    CHECK(std::string(erp_last_error()).find("model-1") != std::string::npos);

    erp_synth_config cfg = erp_synth_config_default();
    cfg.n_models = 0;
    CHECK(erp_run_synth(&cfg, (dir / "x").c_str()) == ERP_ERR_USAGE);
}

TEST_CASE("eval and sweep through the C API") {
    TempDir dir;
    build_workspace(dir, 3);
    const std::string prompts = dir / "data" / "prompts.jsonl", rewards = dir / "data" / "rewards.jsonl",
                      pool = dir / "data" / "pool.json", model = dir / "model", eval_dir = dir / "eval",
                      sweep_dir = dir / "sweep";

    erp_eval_options e = erp_eval_options_default();
    e.prompts_path = prompts.c_str();
    e.rewards_path = rewards.c_str();
    e.pool_path = pool.c_str();
    e.predictors_dir = model.c_str();
    e.out_dir = eval_dir.c_str();
    CHECK(erp_run_eval(&e) == ERP_OK);
    CHECK(std::filesystem::exists(dir / "eval" / "report.json"));

    erp_sweep_options s = erp_sweep_options_default();
    s.prompts_path = prompts.c_str();
    s.rewards_path = rewards.c_str();
    s.pool_path = pool.c_str();
    s.predictors_dir = model.c_str();
    s.out_dir = sweep_dir.c_str();
    s.lambda_grid = "0,0.001";
    s.policies = "erp,fixed";
    CHECK(erp_run_sweep(&s) == ERP_OK);
    CHECK(std::filesystem::exists(dir / "sweep" / "pareto.csv"));

    s.policies = "nope";
    CHECK(erp_run_sweep(&s) == ERP_ERR_USAGE);
    s.policies = "all";
    s.zooter_temperature = 0.0;
    CHECK(erp_run_sweep(&s) == ERP_ERR_USAGE);
}
