// erp: command-line front end for liberp.
//
//   erp synth  --out-dir DIR [--seed N] [...]
//   erp train  --prompts F --rewards F --pool F --out-dir DIR [--beta B] [--train-fraction F]
//   erp eval   --prompts F --rewards F --pool F --out-dir DIR [--predictors-dir DIR] [--label-mode sample|mean]
//   erp sweep  --prompts F --rewards F --pool F --out-dir DIR [--lambda-grid auto|a,b,..] [--policies ...]
//   erp prop1  --mu0 A --mu1 B --sigma S --n N [--seed N]
//   erp serve  --predictors-dir DIR --pool F [--bind HOST:PORT] [--default-lambda L]
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 numerical.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "erp/erp.h"
#include "service/route_service.hpp"

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("erp");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    const char* env = std::getenv("ERP_LOG_LEVEL");
    const std::string level = env ? env : "info";
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "warn") spdlog::set_level(spdlog::level::warn);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::set_level(spdlog::level::info);
}

int finish(erp_status s, const char* what) {
    if (s == ERP_OK) {
        spdlog::info("{} done", what);
        return 0;
    }
    spdlog::error("{} failed: {}", what, erp_last_error());
    return static_cast<int>(s);
}

int run_prop1(double mu0, double mu1, double sigma, uint64_t n, uint64_t seed, const std::string& family) {
    erp_prop1_result r{};
    const erp_status s = erp_prop1_monte_carlo(mu0, mu1, sigma, n, seed,
                                               family == "bounded" ? ERP_FAMILY_BOUNDED : ERP_FAMILY_GAUSSIAN, &r);
    if (s != ERP_OK) return finish(s, "prop1");
    nlohmann::ordered_json out;
    out["manifest"] = {{"subcommand", "prop1"},
                       {"seed", std::to_string(seed)},
                       {"hyperparameters", {{"mu0", mu0}, {"mu1", mu1}, {"sigma", sigma}, {"n", n}, {"family", family}}}};
    out["empirical_win_probability"] = r.empirical;
    out["bound"] = r.bound;
    out["slack"] = r.slack;
    out["satisfied"] = r.satisfied != 0;
    std::cout << out.dump(2) << std::endl;
    if (!r.satisfied) {
        spdlog::error("empirical win probability {} is below bound {} minus slack {}", r.empirical, r.bound, r.slack);
        return ERP_ERR_NUMERIC;
    }
    return 0;
}

int run_serve(const std::string& predictors_dir, const std::string& pool, const std::string& bind,
              double default_lambda) {
    std::pair<std::string, int> addr;
    std::unique_ptr<erp::service::RouteService> service;
    try {
        addr = erp::service::parse_bind(bind);
        service = std::make_unique<erp::service::RouteService>(default_lambda);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return ERP_ERR_USAGE;
    }

    httplib::Server server;
    server.set_tcp_nodelay(true);
    service->mount(server);
    if (!server.bind_to_port(addr.first, addr.second)) {
        spdlog::error("cannot bind {}:{}", addr.first, addr.second);
        return ERP_ERR_USAGE;
    }
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::thread listener([&] { server.listen_after_bind(); });

    // Requests arriving before this completes get 503.
    try {
        service->load(predictors_dir, pool);
    } catch (const std::exception& e) {
        spdlog::error("loading models failed: {}", e.what());
        server.stop();
        listener.join();
        return ERP_ERR_DATA;
    }
    spdlog::info("serving on {}:{} (default lambda {})", addr.first, addr.second, default_lambda);

    while (!g_stop.load() && server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    spdlog::info("shutting down");
    server.stop();
    listener.join();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Expected-reward prediction and cost-aware model routing"};
    app.require_subcommand(1);

    std::string prompts, rewards, pool, out_dir, predictors_dir, split;
    uint64_t seed = 0;
    auto add_data = [&](CLI::App* cmd) {
        cmd->add_option("--prompts", prompts, "Prompts JSON-lines file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--rewards", rewards, "Reward samples JSON-lines file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--pool", pool, "Model pool JSON file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--out-dir", out_dir, "Output directory")->required();
        cmd->add_option("--seed", seed, "Master seed");
    };
    auto add_predictors = [&](CLI::App* cmd) {
        cmd->add_option("--predictors-dir", predictors_dir, "Directory with trained predictors (default: --out-dir)");
        cmd->add_option("--split", split, "Split manifest (default: <predictors-dir>/split.json)");
    };

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with known ground truth");
    erp_synth_config scfg = erp_synth_config_default();
    synth->add_option("--out-dir", out_dir, "Output directory")->required();
    synth->add_option("--seed", scfg.seed, "Master seed");
    synth->add_option("--categories", scfg.n_categories, "Number of prompt categories");
    synth->add_option("--prompts-per-category", scfg.prompts_per_category, "Prompts per category");
    synth->add_option("--dim", scfg.dim, "Embedding dimension");
    synth->add_option("--models", scfg.n_models, "Number of models in the pool");
    synth->add_option("--samples", scfg.samples_per_prompt, "Reward samples per (prompt, model)");
    synth->add_option("--noise-sigma", scfg.noise_sigma, "Reward noise standard deviation");
    synth->add_option("--cluster-spread", scfg.cluster_spread, "Within-category embedding spread");

    auto* train = app.add_subcommand("train", "Split the data and fit one ridge predictor per model");
    erp_train_options topt = erp_train_options_default();
    add_data(train);
    train->add_option("--beta", topt.beta, "Ridge regularization strength");
    train->add_option("--train-fraction", topt.train_fraction, "Per-category training fraction");

    auto* eval = app.add_subcommand("eval", "R^2, pairwise AUROC and win-rate report on the test split");
    std::string label_mode = "sample";
    add_data(eval);
    add_predictors(eval);
    eval->add_option("--label-mode", label_mode, "Ground-truth pairwise labels")
        ->check(CLI::IsMember({"sample", "mean"}));

    auto* sweep = app.add_subcommand("sweep", "Cost/regret sweep of every routing policy over lambda");
    std::string lambda_grid = "auto", policies = "all", zooter_targets = "mean";
    double zooter_temperature = 1.0, zooter_l2 = 1e-5;
    add_data(sweep);
    add_predictors(sweep);
    sweep->add_option("--lambda-grid", lambda_grid, "\"auto\" or a comma-separated list");
    sweep->add_option("--policies", policies, "Comma list of erp,zooter,fixed,random,permutation,oracle or all");
    sweep->add_option("--zooter-temperature", zooter_temperature, "Softmax temperature of the Zooter targets");
    sweep->add_option("--zooter-l2", zooter_l2, "Zooter weight penalty");
    sweep->add_option("--zooter-targets", zooter_targets, "Per-model reward used for Zooter targets")
        ->check(CLI::IsMember({"mean", "sample"}));

    auto* prop1 = app.add_subcommand("prop1", "Monte-Carlo check of the subgaussian win-rate bound");
    double mu0 = 0.0, mu1 = 0.0, sigma = 1.0;
    uint64_t n = 100000;
    std::string family = "gaussian";
    prop1->add_option("--mu0", mu0, "Mean reward of model 0");
    prop1->add_option("--mu1", mu1, "Mean reward of model 1");
    prop1->add_option("--sigma", sigma, "Subgaussian scale");
    prop1->add_option("--n", n, "Number of Monte-Carlo pairs");
    prop1->add_option("--seed", seed, "Master seed");
    prop1->add_option("--family", family, "Reward distribution")->check(CLI::IsMember({"gaussian", "bounded"}));

    auto* serve = app.add_subcommand("serve", "HTTP routing service");
    std::string bind = "127.0.0.1:8080";
    double default_lambda = 0.0;
    serve->add_option("--predictors-dir", predictors_dir, "Directory with trained predictors")->required();
    serve->add_option("--pool", pool, "Model pool JSON file")->required();
    serve->add_option("--bind", bind, "HOST:PORT to listen on");
    serve->add_option("--default-lambda", default_lambda, "Lambda used when a request omits it");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ERP_ERR_USAGE;
    }

    const std::string pdir = predictors_dir.empty() ? out_dir : predictors_dir;
    if (*synth) {
        return finish(erp_run_synth(&scfg, out_dir.c_str()), "synth");
    }
    if (*train) {
        topt.prompts_path = prompts.c_str();
        topt.rewards_path = rewards.c_str();
        topt.pool_path = pool.c_str();
        topt.out_dir = out_dir.c_str();
        topt.seed = seed;
        return finish(erp_run_train(&topt), "train");
    }
    if (*eval) {
        erp_eval_options o = erp_eval_options_default();
        o.prompts_path = prompts.c_str();
        o.rewards_path = rewards.c_str();
        o.pool_path = pool.c_str();
        o.predictors_dir = pdir.c_str();
        o.split_path = split.empty() ? nullptr : split.c_str();
        o.out_dir = out_dir.c_str();
        o.seed = seed;
        o.label_mode = label_mode == "mean" ? ERP_LABEL_MEAN : ERP_LABEL_SAMPLE;
        return finish(erp_run_eval(&o), "eval");
    }
    if (*sweep) {
        erp_sweep_options o = erp_sweep_options_default();
        o.prompts_path = prompts.c_str();
        o.rewards_path = rewards.c_str();
        o.pool_path = pool.c_str();
        o.predictors_dir = pdir.c_str();
        o.split_path = split.empty() ? nullptr : split.c_str();
        o.out_dir = out_dir.c_str();
        o.seed = seed;
        o.lambda_grid = lambda_grid.c_str();
        o.policies = policies.c_str();
        o.zooter_temperature = zooter_temperature;
        o.zooter_l2 = zooter_l2;
        o.zooter_targets = zooter_targets == "sample" ? ERP_ZOOTER_SAMPLE : ERP_ZOOTER_MEAN;
        return finish(erp_run_sweep(&o), "sweep");
    }
    if (*prop1) return run_prop1(mu0, mu1, sigma, n, seed, family);
    if (*serve) return run_serve(predictors_dir, pool, bind, default_lambda);
    return ERP_ERR_USAGE;
}
