#include <doctest.h>

#include <set>
#include <sstream>

#include "core/pipeline.hpp"
#include "unit/support.hpp"

using namespace erp;
using namespace erp::pipeline;
using erp::testing::read_text;
using erp::testing::TempDir;

namespace {

struct Workspace {
    TempDir dir;
    fs::path data() const { return dir / "data"; }
    fs::path model() const { return dir / "model"; }

    explicit Workspace(SynthConfig cfg, double beta = 1.0) {
        run_synth({cfg, data()});
        TrainOptions t;
        t.prompts = data() / kPromptsFile;
        t.rewards = data() / kRewardsFile;
        t.pool = data() / kPoolFile;
        t.out_dir = model();
        t.beta = beta;
        run_train(t);
    }

    EvalInputs inputs() const { return {data() / kPromptsFile, data() / kRewardsFile, data() / kPoolFile, model(), {}}; }
};

SynthConfig small(std::size_t categories = 3) {
    SynthConfig c;
    c.n_categories = categories;
    c.prompts_per_category = 40;
    c.dim = 6;
    c.n_models = 3;
    c.samples_per_prompt = 4;
    c.noise_sigma = 0.2;
    return c;
}

std::vector<std::string> csv_column(const std::string& csv, std::size_t col) {
    std::vector<std::string> out;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string cell;
        for (std::size_t k = 0; k <= col; ++k) std::getline(row, cell, ',');
        out.push_back(cell);
    }
    return out;
}

}  // namespace

TEST_CASE("synth and train write the expected files") {
    Workspace ws(small());
    for (const char* f : {kPromptsFile, kRewardsFile, kPoolFile, kGroundTruthFile})
        CHECK(fs::exists(ws.data() / f));
    for (int j = 0; j < 3; ++j)
        CHECK(fs::exists(ws.model() / predictor_file_name("model-" + std::to_string(j))));
    const auto split = io::parse_json_file(ws.model() / kSplitFile);
    CHECK(split["assignments"].size() == 120);
    CHECK(split["manifest"]["seed"] == "0");
    const auto pool = io::parse_json_file(ws.data() / kPoolFile);
    CHECK(pool["manifest"]["subcommand"] == "synth");
}

TEST_CASE("train with beta = 0 on collinear embeddings fails numerically") {
    auto c = small(1);
    c.dim = 60;  // more coefficients than the 20 training prompts
    TempDir dir;
    run_synth({c, dir / "data"});
    TrainOptions t;
    t.prompts = dir / "data" / kPromptsFile;
    t.rewards = dir / "data" / kRewardsFile;
    t.pool = dir / "data" / kPoolFile;
    t.out_dir = dir / "model";
    t.beta = 0.0;
    CHECK_THROWS_AS(run_train(t), NumericalError);
    CHECK_FALSE(fs::exists(dir / "model" / predictor_file_name("model-0")));
}

TEST_CASE("eval report on noiseless data") {
    auto c = small(1);
    c.noise_sigma = 0.0;
    c.samples_per_prompt = 1;
    Workspace ws(c, 1e-10);
    EvalOptions e;
    e.inputs = ws.inputs();
    e.out_dir = ws.dir / "eval";
    run_eval(e);
    const auto report = io::parse_json_file(ws.dir / "eval" / "report.json");
    for (const auto& [model, per_cat] : report["r2"].items()) {
        CHECK(per_cat.size() == 2);
        CHECK(per_cat[kAggregate].get<double>() >= 1.0 - 1e-9);
        CHECK(per_cat["category-0"].get<double>() >= 1.0 - 1e-9);
    }
    CHECK(report["auroc"].size() == 3);
    CHECK(report["n_train"] == 20);
    CHECK(report["n_test"] == 20);
    for (const char* f : {"scatter.csv", "er_matrix_predicted.csv", "er_matrix_empirical.csv"})
        CHECK(fs::exists(ws.dir / "eval" / f));
}

TEST_CASE("eval rejects a missing predictor and a foreign split") {
    Workspace ws(small());
    EvalOptions e;
    e.inputs = ws.inputs();
    e.out_dir = ws.dir / "eval";

    fs::rename(ws.model() / predictor_file_name("model-1"), ws.dir / "moved.json");
    try {
        run_eval(e);
        FAIL("expected an error");
    } catch (const DataError& err) {
        CHECK(std::string(err.what()).find("model-1") != std::string::npos);
    }
    fs::rename(ws.dir / "moved.json", ws.model() / predictor_file_name("model-1"));
    CHECK_NOTHROW(run_eval(e));

    // Retraining under a different seed changes the split; mixing predictor
    // files from the two runs must be refused.
    TrainOptions t;
    t.prompts = ws.data() / kPromptsFile;
    t.rewards = ws.data() / kRewardsFile;
    t.pool = ws.data() / kPoolFile;
    t.out_dir = ws.dir / "other";
    t.seed = 5;
    run_train(t);
    fs::copy_file(ws.dir / "other" / predictor_file_name("model-2"), ws.model() / predictor_file_name("model-2"),
                  fs::copy_options::overwrite_existing);
    CHECK_THROWS_AS(run_eval(e), DataError);
}

TEST_CASE("sweep with a single lambda gives one point per policy variant") {
    Workspace ws(small());
    SweepOptions s;
    s.inputs = ws.inputs();
    s.out_dir = ws.dir / "sweep";
    s.lambdas = {0.0};
    const auto result = run_sweep(s);
    std::multiset<std::string> names;
    for (const auto& p : result.points) names.insert(p.policy_name);
    for (const char* n : {"erp", "permutation", "zooter", "random", "oracle", "fixed:model-0", "fixed:model-1",
                          "fixed:model-2"})
        CHECK(names.count(n) == 1);
    CHECK(names.size() == 8);

    const auto policies = csv_column(read_text(ws.dir / "sweep" / "pareto.csv"), 0);
    CHECK(policies.size() == 8);
    CHECK(fs::exists(ws.dir / "sweep" / "frontier_erp.csv"));
    CHECK(fs::exists(ws.dir / "sweep" / "sweep_manifest.json"));
}

TEST_CASE("sweep restricted to erp") {
    Workspace ws(small());
    SweepOptions s;
    s.inputs = ws.inputs();
    s.out_dir = ws.dir / "sweep";
    s.policies = parse_policies("erp");
    const auto result = run_sweep(s);
    CHECK(result.points.size() == 33);
    for (const auto& p : result.points) CHECK(p.policy_name == "erp");
    for (const auto& name : csv_column(read_text(ws.dir / "sweep" / "assignments.csv"), 1)) CHECK(name == "erp");
}

TEST_CASE("option parsing") {
    CHECK(parse_lambda_grid("auto").empty());
    CHECK(parse_lambda_grid("0,0.5,2") == std::vector<double>{0.0, 0.5, 2.0});
    CHECK_THROWS_AS(parse_lambda_grid("0,-1"), UsageError);
    CHECK_THROWS_AS(parse_lambda_grid("abc"), UsageError);
    CHECK_THROWS_AS(parse_lambda_grid(""), UsageError);
    CHECK(parse_policies("all").size() == kAllPolicies.size());
    CHECK(parse_policies("erp,oracle") == std::set<std::string>{"erp", "oracle"});
    CHECK_THROWS_AS(parse_policies("erp,bogus"), UsageError);
    CHECK(predictor_file_name("a/b c") == "predictor_a_b_c.json");
}
