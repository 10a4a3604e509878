#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include <fmt/format.h>

#include "dataset.hpp"
#include "io.hpp"
#include "ridge.hpp"
#include "routing.hpp"

namespace erp::pipeline {

using io::json;

std::string predictor_file_name(const std::string& model_id) {
    return "predictor_" + io::file_safe(model_id) + ".json";
}

namespace {

std::string seed_string(std::uint64_t seed) { return std::to_string(seed); }

json base_manifest(const char* subcommand, std::uint64_t seed) {
    json m;
    m["subcommand"] = subcommand;
    // Kept as a string so 64-bit seeds survive JSON readers that use doubles.
    m["seed"] = seed_string(seed);
    return m;
}

json embedding_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

std::string split_fingerprint(const std::vector<PromptRecord>& prompts) {
    std::vector<std::pair<std::string, Split>> rows;
    for (const auto& p : prompts) rows.emplace_back(p.id, p.split);
    std::sort(rows.begin(), rows.end());
    std::uint64_t h = fnv1a("");
    for (const auto& [id, split] : rows) {
        h = fnv1a(id, h);
        h = fnv1a("\t", h);
        h = fnv1a(to_string(split), h);
        h = fnv1a("\n", h);
    }
    return fmt::format("{:016x}", h);
}

void check_full_coverage(const std::vector<PromptRecord>& prompts, const RewardIndex& index, const ModelPool& pool) {
    for (const auto& p : prompts)
        for (const auto& e : pool.entries()) index.at(p.id, e.model_id);
}

// Loaded inputs for eval and sweep. Not movable: the index points into
// `rewards`.
struct Workspace {
    std::vector<PromptRecord> prompts;
    std::vector<RewardSampleSet> rewards;
    std::unique_ptr<RewardIndex> index;
    ModelPool pool;
    std::vector<LinearPredictor> predictors;
    std::string fingerprint;
    double beta = kDefaultBeta;

    Workspace() = default;
    Workspace(const Workspace&) = delete;
    Workspace& operator=(const Workspace&) = delete;

    std::vector<PromptRecord> train() const { return filter_split(prompts, Split::Train); }
    std::vector<PromptRecord> test() const { return filter_split(prompts, Split::Test); }
};

std::unique_ptr<Workspace> load_workspace(const EvalInputs& in) {
    auto ws = std::make_unique<Workspace>();
    ws->prompts = load_prompts(in.prompts);
    if (ws->prompts.empty()) throw DataError("no prompts in '" + in.prompts.string() + "'");
    const std::size_t dim = *common_dim(ws->prompts);
    ws->rewards = load_rewards(in.rewards);
    ws->index = std::make_unique<RewardIndex>(ws->rewards);
    ws->pool = load_pool(in.pool);
    check_full_coverage(ws->prompts, *ws->index, ws->pool);

    const fs::path split_path = in.split.value_or(in.predictors_dir / kSplitFile);
    const json split_doc = io::parse_json_file(split_path);
    std::unordered_map<std::string, Split> assigned;
    try {
        for (const auto& row : split_doc.at("assignments"))
            assigned[row.at("id").get<std::string>()] = split_from_string(row.at("split").get<std::string>());
        ws->fingerprint = split_doc.at("fingerprint").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(split_path.string() + ": malformed split manifest: " + e.what());
    }
    if (assigned.size() != ws->prompts.size())
        throw DataError("split manifest '" + split_path.string() + "' covers " + std::to_string(assigned.size()) +
                        " prompts, the prompts file has " + std::to_string(ws->prompts.size()));
    for (auto& p : ws->prompts) {
        auto it = assigned.find(p.id);
        if (it == assigned.end())
            throw DataError("split manifest mismatch: prompt '" + p.id + "' is not in '" + split_path.string() + "'");
        p.split = it->second;
    }
    if (split_fingerprint(ws->prompts) != ws->fingerprint)
        throw DataError("split manifest '" + split_path.string() + "' fingerprint does not match its assignments");

    for (const auto& e : ws->pool.entries()) {
        const fs::path file = in.predictors_dir / predictor_file_name(e.model_id);
        if (!fs::exists(file))
            throw DataError("missing predictor for pool model '" + e.model_id + "' (expected " + file.string() + ")");
        const json doc = io::parse_json_file(file);
        LinearPredictor p;
        try {
            p = predictor_from_json(doc);
        } catch (const DataError& err) {
            throw DataError(file.string() + ": " + err.what());
        }
        if (p.model_id != e.model_id)
            throw DataError(file.string() + " holds a predictor for '" + p.model_id + "', expected '" + e.model_id + "'");
        if (p.dim() != dim)
            throw DataError("predictor '" + p.model_id + "' has dimension " + std::to_string(p.dim()) +
                            ", embeddings have " + std::to_string(dim));
        const auto m = doc.find("manifest");
        if (m == doc.end() || !m->contains("split_fingerprint") ||
            (*m)["split_fingerprint"].get<std::string>() != ws->fingerprint)
            throw DataError("split manifest mismatch: predictor '" + p.model_id + "' was trained on a different split");
        ws->beta = p.beta;
        ws->predictors.push_back(std::move(p));
    }
    return ws;
}

json inputs_json(const EvalInputs& in, const fs::path& split) {
    json j;
    j["prompts"] = in.prompts.string();
    j["rewards"] = in.rewards.string();
    j["pool"] = in.pool.string();
    j["predictors_dir"] = in.predictors_dir.string();
    j["split"] = split.string();
    return j;
}

std::vector<std::string> categories_of(const std::vector<PromptRecord>& prompts) {
    std::vector<std::string> out;
    out.reserve(prompts.size());
    for (const auto& p : prompts) out.push_back(p.category);
    return out;
}

std::vector<std::string> ids_of(const std::vector<PromptRecord>& prompts) {
    std::vector<std::string> out;
    out.reserve(prompts.size());
    for (const auto& p : prompts) out.push_back(p.id);
    return out;
}

json win_rates_json(const std::vector<WinRateTable>& tables, const ModelPool& pool) {
    json arr = json::array();
    for (const auto& t : tables) {
        json row;
        row["category"] = t.category;
        json frac;
        for (std::size_t j = 0; j < pool.size(); ++j) frac[pool.id(j)] = t.win_fraction[j];
        row["win_fraction"] = frac;
        arr.push_back(row);
    }
    return arr;
}

std::vector<double> column(const Matrix& m, Eigen::Index j) {
    std::vector<double> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
    return out;
}

std::uint64_t label_seed(std::uint64_t seed, const std::string& prompt, const std::string& a, const std::string& b) {
    return derive_seed(seed, "labels/" + prompt + "/" + a + "/" + b);
}

}  // namespace

void run_synth(const SynthOptions& opts) {
    const SynthData data = generate(opts.config);
    io::ensure_dir(opts.out_dir);

    std::string prompts;
    for (const auto& p : data.prompts) {
        json j;
        j["id"] = p.id;
        j["category"] = p.category;
        j["embedding"] = embedding_json(p.embedding);
        prompts += j.dump() + "\n";
    }
    std::string rewards;
    for (const auto& s : data.rewards) {
        json j;
        j["prompt_id"] = s.prompt_id;
        j["model_id"] = s.model_id;
        j["rewards"] = s.rewards;
        rewards += j.dump() + "\n";
    }

    const auto& c = opts.config;
    json manifest = base_manifest("synth", c.seed);
    manifest["hyperparameters"] = {{"n_categories", c.n_categories},
                                   {"prompts_per_category", c.prompts_per_category},
                                   {"dim", c.dim},
                                   {"n_models", c.n_models},
                                   {"samples_per_prompt", c.samples_per_prompt},
                                   {"noise_sigma", c.noise_sigma},
                                   {"cluster_spread", c.cluster_spread}};

    json pool;
    pool["models"] = json::array();
    for (const auto& e : data.pool.entries()) pool["models"].push_back({{"id", e.model_id}, {"cost", e.cost}});
    pool["manifest"] = manifest;

    json truth;
    truth["predictors"] = json::array();
    for (const auto& p : data.truth) truth["predictors"].push_back(predictor_to_json(p));
    truth["manifest"] = manifest;

    io::write_file(opts.out_dir / kPromptsFile, prompts);
    io::write_file(opts.out_dir / kRewardsFile, rewards);
    io::write_file(opts.out_dir / kPoolFile, io::dump_json(pool));
    io::write_file(opts.out_dir / kGroundTruthFile, io::dump_json(truth));
}

TrainSummary run_train(const TrainOptions& opts) {
    auto prompts = load_prompts(opts.prompts);
    if (prompts.empty()) throw DataError("no prompts in '" + opts.prompts.string() + "'");
    common_dim(prompts);
    const auto rewards = load_rewards(opts.rewards);
    const RewardIndex index(rewards);
    const ModelPool pool = load_pool(opts.pool);
    check_full_coverage(prompts, index, pool);

    prompts = stratified_split(std::move(prompts), opts.seed, opts.train_fraction);
    TrainSummary summary;
    for (const auto& p : prompts) (p.split == Split::Train ? summary.n_train : summary.n_test)++;
    if (summary.n_train == 0) throw DataError("the split left no training prompts");

    const std::string fingerprint = split_fingerprint(prompts);
    json manifest = base_manifest("train", opts.seed);
    manifest["inputs"] = {{"prompts", opts.prompts.string()},
                          {"rewards", opts.rewards.string()},
                          {"pool", opts.pool.string()}};
    manifest["hyperparameters"] = {{"beta", opts.beta}, {"train_fraction", opts.train_fraction}};
    manifest["split_fingerprint"] = fingerprint;

    // Fit everything before writing so a numerical failure leaves no partial output.
    std::vector<LinearPredictor> fitted;
    for (const auto& e : pool.entries()) {
        const ERDataset ds = build_er_dataset(prompts, index, e.model_id, Split::Train);
        fitted.push_back(fit_ridge(ds, opts.beta));
    }

    io::ensure_dir(opts.out_dir);
    for (const auto& p : fitted) {
        const fs::path file = opts.out_dir / predictor_file_name(p.model_id);
        save_predictor(file, p, manifest);
        summary.predictor_files.push_back(file);
    }

    json split;
    split["manifest"] = manifest;
    split["fingerprint"] = fingerprint;
    split["assignments"] = json::array();
    for (const auto& p : prompts)
        split["assignments"].push_back({{"id", p.id}, {"category", p.category}, {"split", to_string(p.split)}});
    io::write_file(opts.out_dir / kSplitFile, io::dump_json(split));
    return summary;
}

void run_eval(const EvalOptions& opts) {
    const auto ws = load_workspace(opts.inputs);
    const auto test = ws->test();
    const auto train = ws->train();
    if (test.empty()) throw DataError("the split has no test prompts");
    const auto& pool = ws->pool;

    const ERMatrix predicted = predict_matrix(ws->predictors, pool, test);
    const ERMatrix empirical = empirical_matrix(test, *ws->index, pool);
    const auto categories = categories_of(test);

    json report;
    json manifest = base_manifest("eval", opts.seed);
    manifest["inputs"] = inputs_json(opts.inputs, opts.inputs.split.value_or(opts.inputs.predictors_dir / kSplitFile));
    manifest["hyperparameters"] = {{"label_mode", opts.label_mode == LabelMode::Sample ? "sample" : "mean"},
                                   {"beta", ws->beta}};
    report["manifest"] = manifest;
    report["n_train"] = train.size();
    report["n_test"] = test.size();

    json r2;
    for (std::size_t j = 0; j < pool.size(); ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const auto per_cat = per_category_r2(column(predicted.values, jj), column(empirical.values, jj), categories);
        json entry;
        entry[kAggregate] = per_cat.at(kAggregate) ? json(*per_cat.at(kAggregate)) : json(nullptr);
        for (const auto& [cat, v] : per_cat)
            if (cat != kAggregate) entry[cat] = v ? json(*v) : json(nullptr);
        r2[pool.id(j)] = entry;
    }
    report["r2"] = r2;

    // Pairwise win prediction: ERP sigmoid score vs. a logistic classifier
    // trained per pair on the training split.
    const double l2 = std::max(ws->beta / static_cast<double>(std::max<std::size_t>(train.size(), 1)), 1e-8);
    Matrix train_features(static_cast<Eigen::Index>(train.size()),
                          test.front().embedding.size());
    for (std::size_t i = 0; i < train.size(); ++i)
        train_features.row(static_cast<Eigen::Index>(i)) = train[i].embedding.transpose();
    json aurocs = json::array();
    for (std::size_t a = 0; a < pool.size(); ++a)
        for (std::size_t b = a + 1; b < pool.size(); ++b) {
            const auto& ida = pool.id(a);
            const auto& idb = pool.id(b);
            auto labels_for = [&](const std::vector<PromptRecord>& ps) {
                std::vector<bool> out;
                for (const auto& p : ps)
                    out.push_back(pairwise_win_label(ws->index->at(p.id, ida), ws->index->at(p.id, idb),
                                                     label_seed(opts.seed, p.id, ida, idb), opts.label_mode));
                return out;
            };
            const auto test_labels = labels_for(test);
            const auto train_labels = labels_for(train);

            json row;
            row["model_a"] = ida;
            row["model_b"] = idb;
            row["positive_rate"] =
                static_cast<double>(std::count(test_labels.begin(), test_labels.end(), true)) / static_cast<double>(test.size());
            std::vector<double> erp_scores;
            for (std::size_t i = 0; i < test.size(); ++i)
                erp_scores.push_back(pairwise_win_score(predicted.values(static_cast<Eigen::Index>(i), a),
                                                        predicted.values(static_cast<Eigen::Index>(i), b)));
            try {
                row["erp"] = auroc(erp_scores, test_labels);
            } catch (const DataError&) {
                row["erp"] = nullptr;
            }
            try {
                const LogisticFit fit = fit_pairwise_logistic(train_features, train_labels, l2);
                std::vector<double> lr_scores;
                for (const auto& p : test) lr_scores.push_back(logistic_probability(fit, p.embedding));
                row["logistic"] = auroc(lr_scores, test_labels);
            } catch (const DataError&) {
                row["logistic"] = nullptr;
            }
            aurocs.push_back(row);
        }
    report["auroc"] = aurocs;

    json win;
    win["ground_truth"] = win_rates_json(win_rate_table(empirical, categories), pool);
    win["predicted"] = win_rates_json(win_rate_table(predicted, categories), pool);
    report["win_rates"] = win;

    std::string scatter = "prompt_id,category,model_id,predicted_er,empirical_er\n";
    for (std::size_t i = 0; i < test.size(); ++i)
        for (std::size_t j = 0; j < pool.size(); ++j) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            scatter += test[i].id + "," + test[i].category + "," + pool.id(j) + "," +
                       io::format17(predicted.values(ii, jj)) + "," + io::format17(empirical.values(ii, jj)) + "\n";
        }

    io::ensure_dir(opts.out_dir);
    io::write_file(opts.out_dir / "report.json", io::dump_json(report));
    io::write_file(opts.out_dir / "scatter.csv", scatter);
    io::write_file(opts.out_dir / "er_matrix_predicted.csv", er_matrix_csv(predicted));
    io::write_file(opts.out_dir / "er_matrix_empirical.csv", er_matrix_csv(empirical));
}

SweepResult run_sweep(const SweepOptions& opts) {
    for (const auto& p : opts.policies)
        if (std::find(kAllPolicies.begin(), kAllPolicies.end(), p) == kAllPolicies.end())
            throw UsageError("unknown policy '" + p + "'");
    for (double l : opts.lambdas)
        if (!(l >= 0.0) || !std::isfinite(l)) throw UsageError("lambda values must be finite and non-negative");

    const auto ws = load_workspace(opts.inputs);
    const auto test = ws->test();
    const auto train = ws->train();
    if (test.empty()) throw DataError("the split has no test prompts");
    if (train.empty()) throw DataError("the split has no training prompts");
    const auto& pool = ws->pool;
    const auto test_ids = ids_of(test);

    const ERMatrix empirical = empirical_matrix(test, *ws->index, pool);
    const ERMatrix predicted = predict_matrix(ws->predictors, pool, test);
    auto wants = [&](const char* name) { return opts.policies.count(name) > 0; };
    auto grid_for = [&](const Matrix& scores) {
        return opts.lambdas.empty() ? auto_lambda_grid(auto_lambda_max(scores, pool)) : opts.lambdas;
    };

    std::vector<ParetoPoint> points;
    std::vector<ParetoPoint> frontier_input;
    std::string assignments = assignment_csv_header();
    std::vector<std::string> emitted;
    json grids;
    auto record = [&](const RoutingAssignment& a) {
        points.push_back({a.policy_name, a.lambda, mean_cost(a, pool), mean_regret(empirical, a)});
        assignments += assignment_csv_rows(a, pool);
        if (emitted.empty() || emitted.back() != a.policy_name) emitted.push_back(a.policy_name);
    };

    if (wants("erp") || wants("permutation")) {
        const auto grid = grid_for(predicted.values);
        std::vector<RoutingAssignment> erp_runs;
        for (double l : grid) erp_runs.push_back(route_erp(predicted, pool, l));
        if (wants("erp")) {
            grids["erp"] = grid;
            for (const auto& a : erp_runs) record(a);
        }
        if (wants("permutation")) {
            grids["permutation"] = grid;
            for (std::size_t k = 0; k < erp_runs.size(); ++k)
                record(permute_assignment(erp_runs[k], derive_seed(opts.seed, fmt::format("permutation/{}", k))));
        }
    }

    json zooter_info = nullptr;
    if (wants("zooter")) {
        Matrix features(static_cast<Eigen::Index>(train.size()), test.front().embedding.size());
        Matrix targets(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(pool.size()));
        for (std::size_t i = 0; i < train.size(); ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            features.row(ii) = train[i].embedding.transpose();
            for (std::size_t j = 0; j < pool.size(); ++j) {
                const auto& set = ws->index->at(train[i].id, pool.id(j));
                double r;
                if (opts.zooter_targets == ZooterTargets::Mean) {
                    r = empirical_er(set);
                } else {
                    auto eng = make_stream(opts.seed, "zooter-sample/" + train[i].id + "/" + pool.id(j));
                    r = set.rewards[std::uniform_int_distribution<std::size_t>(0, set.rewards.size() - 1)(eng)];
                }
                targets(ii, static_cast<Eigen::Index>(j)) = r;
            }
        }
        ZooterOptions zo;
        zo.temperature = opts.zooter_temperature;
        zo.l2 = opts.zooter_l2;
        const ZooterModel z = fit_zooter(features, targets, zo);
        const ERMatrix logits = zooter_logit_matrix(z, pool, test);
        const auto grid = grid_for(logits.values);
        grids["zooter"] = grid;
        for (double l : grid) record(route_zooter(z, pool, l, test));
        zooter_info = {{"temperature", z.temperature},
                       {"l2", zo.l2},
                       {"targets", opts.zooter_targets == ZooterTargets::Mean ? "mean" : "sample"},
                       {"iterations", z.iterations},
                       {"final_grad_inf_norm", z.grad_norm},
                       {"lambda_units", "logit"}};
    }

    if (wants("fixed"))
        for (std::size_t j = 0; j < pool.size(); ++j) record(route_fixed(j, pool, test_ids));

    if (wants("random")) record(route_random(pool, test_ids, derive_seed(opts.seed, "random")));

    if (wants("oracle")) {
        const ERMatrix train_emp = empirical_matrix(train, *ws->index, pool);
        Matrix means(0, static_cast<Eigen::Index>(pool.size()));
        {
            const auto cm = category_means(train, train_emp);
            means.resize(static_cast<Eigen::Index>(cm.size()), static_cast<Eigen::Index>(pool.size()));
            Eigen::Index r = 0;
            for (const auto& [cat, v] : cm) means.row(r++) = v.transpose();
        }
        const auto grid = grid_for(means);
        grids["oracle"] = grid;
        for (double l : grid) record(route_by_category(per_category_oracle(train, train_emp, pool, l), test, l));
    }

    io::ensure_dir(opts.out_dir);
    io::write_file(opts.out_dir / "pareto.csv", pareto_csv(points));
    io::write_file(opts.out_dir / "assignments.csv", assignments);
    for (const auto& name : emitted) {
        std::vector<ParetoPoint> mine;
        for (const auto& p : points)
            if (p.policy_name == name) mine.push_back(p);
        io::write_file(opts.out_dir / ("frontier_" + io::file_safe(name) + ".csv"), pareto_csv(pareto_frontier(mine)));
    }

    json manifest = base_manifest("sweep", opts.seed);
    manifest["inputs"] = inputs_json(opts.inputs, opts.inputs.split.value_or(opts.inputs.predictors_dir / kSplitFile));
    json pols = json::array();
    for (const auto& p : kAllPolicies)
        if (wants(p.c_str())) pols.push_back(p);
    manifest["hyperparameters"] = {{"policies", pols},
                                   {"lambda_grid", opts.lambdas.empty() ? json("auto") : json(opts.lambdas)},
                                   {"zooter_temperature", opts.zooter_temperature},
                                   {"zooter_l2", opts.zooter_l2}};
    json doc;
    doc["manifest"] = manifest;
    doc["lambda_grids"] = grids;
    doc["zooter"] = zooter_info;
    doc["n_test"] = test.size();
    io::write_file(opts.out_dir / "sweep_manifest.json", io::dump_json(doc));
    return SweepResult{std::move(points)};
}

std::set<std::string> parse_policies(const std::string& list) {
    std::set<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (item.empty()) continue;
        if (item == "all") {
            out.insert(kAllPolicies.begin(), kAllPolicies.end());
            continue;
        }
        if (std::find(kAllPolicies.begin(), kAllPolicies.end(), item) == kAllPolicies.end())
            throw UsageError("unknown policy '" + item + "'");
        out.insert(item);
    }
    if (out.empty()) throw UsageError("no policies selected");
    return out;
}

std::vector<double> parse_lambda_grid(const std::string& text) {
    if (text == "auto") return {};
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw UsageError("bad lambda value '" + item + "'");
        }
        if (item.find_first_not_of(" \t", used) != std::string::npos) throw UsageError("bad lambda value '" + item + "'");
        if (!(v >= 0.0) || !std::isfinite(v)) throw UsageError("lambda values must be finite and non-negative");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("empty lambda grid");
    return out;
}

}  // namespace erp::pipeline
