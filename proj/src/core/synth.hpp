#pragma once

#include <cstdint>
#include <vector>

#include "dataset.hpp"
#include "model_pool.hpp"
#include "ridge.hpp"

namespace erp {

struct SynthConfig {
    std::size_t n_categories = 4;
    std::size_t prompts_per_category = 250;
    std::size_t dim = 16;
    std::size_t n_models = 5;
    std::size_t samples_per_prompt = 32;
    double noise_sigma = 0.5;
    double cluster_spread = 1.0;
    std::uint64_t seed = 0;
};

/// Throws UsageError on counts < 1, negative noise or non-positive spread.
void validate(const SynthConfig& cfg);

struct SynthData {
    std::vector<PromptRecord> prompts;
    std::vector<RewardSampleSet> rewards;  // prompt-major, pool order within a prompt
    ModelPool pool;
    std::vector<LinearPredictor> truth;  // ER*_m(x) = theta*_m . x + b*_m, pool order
};

/// Seeded synthetic universe with linear ground truth.
///  - category centers mu_c ~ N(0, I); embeddings ~ N(mu_c, spread^2 I)
///  - theta*_m ~ N(0, I / D); b*_m rises with model cost plus N(0, 0.1^2)
///  - every reward sample = ER*_m(x) + N(0, noise_sigma^2)
///  - costs are geometric from 8 to 70 (a single model costs 8)
SynthData generate(const SynthConfig& cfg);

}  // namespace erp
