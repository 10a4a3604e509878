#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eval.hpp"
#include "scoring.hpp"
#include "synth.hpp"

// End-to-end subcommands: synth -> train -> eval / sweep. Every artifact
// written here is a pure function of the options (including the seed).
namespace erp::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kPromptsFile = "prompts.jsonl";
inline constexpr const char* kRewardsFile = "rewards.jsonl";
inline constexpr const char* kPoolFile = "pool.json";
inline constexpr const char* kGroundTruthFile = "ground_truth.json";
inline constexpr const char* kSplitFile = "split.json";

std::string predictor_file_name(const std::string& model_id);

struct SynthOptions {
    SynthConfig config;
    fs::path out_dir;
};

/// Writes prompts.jsonl, rewards.jsonl, pool.json and ground_truth.json.
void run_synth(const SynthOptions& opts);

struct TrainOptions {
    fs::path prompts, rewards, pool, out_dir;
    std::uint64_t seed = 0;
    double beta = 1.0;
    double train_fraction = 0.5;
};

struct TrainSummary {
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::vector<fs::path> predictor_files;
};

/// Splits, fits one ridge predictor per pool model on the train split and
/// writes predictor_<model>.json files plus split.json.
TrainSummary run_train(const TrainOptions& opts);

struct EvalInputs {
    fs::path prompts, rewards, pool;
    fs::path predictors_dir;
    std::optional<fs::path> split;  // defaults to <predictors_dir>/split.json
};

struct EvalOptions {
    EvalInputs inputs;
    fs::path out_dir;
    std::uint64_t seed = 0;
    LabelMode label_mode = LabelMode::Sample;
};

/// report.json (R^2 per category, AUROC pairs, win-rate tables), scatter.csv,
/// er_matrix_predicted.csv, er_matrix_empirical.csv.
void run_eval(const EvalOptions& opts);

enum class ZooterTargets { Mean, Sample };

inline const std::vector<std::string> kAllPolicies = {"erp", "zooter", "fixed", "random", "permutation", "oracle"};

struct SweepOptions {
    EvalInputs inputs;
    fs::path out_dir;
    std::uint64_t seed = 0;
    std::vector<double> lambdas;  // empty: per-policy automatic grid
    std::set<std::string> policies{kAllPolicies.begin(), kAllPolicies.end()};
    double zooter_temperature = 1.0;
    double zooter_l2 = 1e-5;
    ZooterTargets zooter_targets = ZooterTargets::Mean;
};

struct SweepResult {
    std::vector<ParetoPoint> points;
};

/// pareto.csv, frontier_<policy>.csv, assignments.csv, sweep_manifest.json.
SweepResult run_sweep(const SweepOptions& opts);

/// Parses "erp,zooter" etc.; "all" selects everything.
std::set<std::string> parse_policies(const std::string& list);

/// Parses "auto" (returns empty) or a comma list of non-negative numbers.
std::vector<double> parse_lambda_grid(const std::string& text);

}  // namespace erp::pipeline
