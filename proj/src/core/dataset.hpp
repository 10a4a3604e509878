#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"
#include "model_pool.hpp"

namespace erp {

enum class Split { Unassigned, Train, Test };

const char* to_string(Split s) noexcept;
Split split_from_string(std::string_view s);

struct PromptRecord {
    std::string id;
    std::string category;
    Vector embedding;
    Split split = Split::Unassigned;
};

/// The K sampled rewards of one model on one prompt.
struct RewardSampleSet {
    std::string prompt_id;
    std::string model_id;
    std::vector<double> rewards;
};

/// Regression data for one model: embeddings (row per prompt) and the
/// empirical expected-reward targets.
struct ERDataset {
    std::string model_id;
    std::vector<std::string> prompt_ids;
    Matrix features;  // n x D
    Vector targets;   // n

    std::size_t size() const noexcept { return prompt_ids.size(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(features.cols()); }
};

// Loaders for the JSON-lines / JSON file formats. Errors carry the 1-based
// line number of the offending record.
std::vector<PromptRecord> load_prompts(const std::filesystem::path& path);
std::vector<RewardSampleSet> load_rewards(const std::filesystem::path& path);
ModelPool load_pool(const std::filesystem::path& path);

/// Embedding dimension shared by all records; nullopt for an empty list.
std::optional<std::size_t> common_dim(std::span<const PromptRecord> prompts);

/// Mean of the samples, accumulated in extended precision and rounded once.
double empirical_er(std::span<const double> rewards);
double empirical_er(const RewardSampleSet& samples);

/// Per-category seeded split. Within each category exactly
/// floor(n * train_fraction) records become Train, the rest Test. Ids are
/// sorted before shuffling, so the result does not depend on input order.
std::vector<PromptRecord> stratified_split(std::vector<PromptRecord> prompts, std::uint64_t seed,
                                           double train_fraction);

/// (prompt_id, model_id) -> sample set lookup.
class RewardIndex {
public:
    explicit RewardIndex(std::span<const RewardSampleSet> sets);
    const RewardSampleSet* find(std::string_view prompt_id, std::string_view model_id) const;
    const RewardSampleSet& at(std::string_view prompt_id, std::string_view model_id) const;

private:
    std::unordered_map<std::string, const RewardSampleSet*> map_;
};

/// Joins prompts with their samples for `model_id`. Only prompts whose split
/// matches `split_filter` are used (nullopt keeps all). A prompt without samples
/// for the model is an error naming "prompt/model".
ERDataset build_er_dataset(std::span<const PromptRecord> prompts, const RewardIndex& index,
                           const std::string& model_id, std::optional<Split> split_filter);
ERDataset build_er_dataset(std::span<const PromptRecord> prompts, std::span<const RewardSampleSet> sets,
                           const std::string& model_id, std::optional<Split> split_filter);

/// Records whose split matches.
std::vector<PromptRecord> filter_split(std::span<const PromptRecord> prompts, Split split);

}  // namespace erp
