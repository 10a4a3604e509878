#include "synth.hpp"

#include <cmath>

#include <fmt/format.h>

namespace erp {

void validate(const SynthConfig& cfg) {
    if (cfg.n_categories < 1 || cfg.prompts_per_category < 1 || cfg.dim < 1 || cfg.n_models < 1 ||
        cfg.samples_per_prompt < 1)
        throw UsageError("synthetic config: all counts must be at least 1");
    if (!(cfg.noise_sigma >= 0.0) || !std::isfinite(cfg.noise_sigma))
        throw UsageError("synthetic config: noise sigma must be non-negative");
    if (!(cfg.cluster_spread > 0.0) || !std::isfinite(cfg.cluster_spread))
        throw UsageError("synthetic config: cluster spread must be positive");
}

SynthData generate(const SynthConfig& cfg) {
    validate(cfg);
    const auto d = static_cast<Eigen::Index>(cfg.dim);
    const std::size_t m = cfg.n_models;
    std::normal_distribution<double> std_normal(0.0, 1.0);

    SynthData out;

    std::vector<PoolEntry> entries;
    for (std::size_t j = 0; j < m; ++j) {
        const double t = m == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(m - 1);
        entries.push_back({fmt::format("model-{}", j), 8.0 * std::pow(70.0 / 8.0, t)});
    }
    out.pool = ModelPool(std::move(entries));

    auto model_eng = make_stream(cfg.seed, "synth/models");
    for (std::size_t j = 0; j < m; ++j) {
        LinearPredictor p;
        p.model_id = out.pool.id(j);
        p.weights.resize(d);
        for (Eigen::Index k = 0; k < d; ++k) p.weights(k) = std_normal(model_eng) / std::sqrt(static_cast<double>(d));
        const double t = m == 1 ? 0.0 : static_cast<double>(j) / static_cast<double>(m - 1);
        p.bias = 0.5 * t + 0.1 * std_normal(model_eng);
        out.truth.push_back(std::move(p));
    }

    auto prompt_eng = make_stream(cfg.seed, "synth/prompts");
    std::vector<Vector> centers;
    for (std::size_t c = 0; c < cfg.n_categories; ++c) {
        Vector mu(d);
        for (Eigen::Index k = 0; k < d; ++k) mu(k) = std_normal(prompt_eng);
        centers.push_back(std::move(mu));
    }
    for (std::size_t c = 0; c < cfg.n_categories; ++c)
        for (std::size_t i = 0; i < cfg.prompts_per_category; ++i) {
            PromptRecord rec;
            rec.id = fmt::format("p{:02}-{:05}", c, i);
            rec.category = fmt::format("category-{}", c);
            rec.embedding.resize(d);
            for (Eigen::Index k = 0; k < d; ++k)
                rec.embedding(k) = centers[c](k) + cfg.cluster_spread * std_normal(prompt_eng);
            out.prompts.push_back(std::move(rec));
        }

    auto reward_eng = make_stream(cfg.seed, "synth/rewards");
    for (const auto& prompt : out.prompts)
        for (std::size_t j = 0; j < m; ++j) {
            RewardSampleSet set;
            set.prompt_id = prompt.id;
            set.model_id = out.pool.id(j);
            const double mean = predict(out.truth[j], prompt.embedding);
            set.rewards.reserve(cfg.samples_per_prompt);
            for (std::size_t k = 0; k < cfg.samples_per_prompt; ++k)
                set.rewards.push_back(cfg.noise_sigma == 0.0 ? mean : mean + cfg.noise_sigma * std_normal(reward_eng));
            out.rewards.push_back(std::move(set));
        }
    return out;
}

}  // namespace erp
