#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "io.hpp"

namespace erp {

using io::json;

const char* to_string(Split s) noexcept {
    switch (s) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Unassigned: break;
    }
    return "unassigned";
}

Split split_from_string(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    if (s == "unassigned") return Split::Unassigned;
    throw DataError("unknown split tag '" + std::string(s) + "'");
}

namespace {

std::string where(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

const json& require(const json& obj, const char* key, json::value_t type, const std::string& loc) {
    auto it = obj.find(key);
    if (it == obj.end()) throw DataError(loc + ": missing field \"" + key + "\"");
    const bool ok = type == json::value_t::number_float ? it->is_number() : it->type() == type;
    if (!ok) throw DataError(loc + ": field \"" + key + "\" has the wrong type");
    return *it;
}

std::vector<double> finite_numbers(const json& arr, const char* what, const std::string& loc) {
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) throw DataError(loc + ": " + what + " contains a non-number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw DataError(loc + ": " + what + " contains a non-finite value");
        out.push_back(x);
    }
    return out;
}

// Calls fn(json, line_no) for every non-blank line.
template <typename Fn>
void for_each_json_line(const std::filesystem::path& path, Fn&& fn) {
    std::istringstream in(io::read_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error&) {
            throw DataError(where(path, line_no) + ": malformed JSON");
        }
        if (!obj.is_object()) throw DataError(where(path, line_no) + ": expected a JSON object");
        fn(obj, line_no);
    }
}

}  // namespace

std::vector<PromptRecord> load_prompts(const std::filesystem::path& path) {
    std::vector<PromptRecord> out;
    std::unordered_set<std::string> ids;
    std::optional<std::size_t> dim;
    for_each_json_line(path, [&](const json& obj, std::size_t line_no) {
        const std::string loc = where(path, line_no);
        PromptRecord rec;
        rec.id = require(obj, "id", json::value_t::string, loc).get<std::string>();
        rec.category = require(obj, "category", json::value_t::string, loc).get<std::string>();
        const auto coords = finite_numbers(require(obj, "embedding", json::value_t::array, loc), "embedding", loc);
        if (coords.empty()) throw DataError(loc + ": embedding is empty");
        if (dim && *dim != coords.size())
            throw DataError(loc + ": dimension mismatch (line " + std::to_string(line_no) + " has " +
                            std::to_string(coords.size()) + ", expected " + std::to_string(*dim) + ")");
        dim = coords.size();
        if (!ids.insert(rec.id).second) throw DataError(loc + ": duplicate prompt id '" + rec.id + "'");
        rec.embedding = Eigen::Map<const Vector>(coords.data(), static_cast<Eigen::Index>(coords.size()));
        out.push_back(std::move(rec));
    });
    return out;
}

std::vector<RewardSampleSet> load_rewards(const std::filesystem::path& path) {
    std::vector<RewardSampleSet> out;
    std::set<std::pair<std::string, std::string>> keys;
    for_each_json_line(path, [&](const json& obj, std::size_t line_no) {
        const std::string loc = where(path, line_no);
        RewardSampleSet set;
        set.prompt_id = require(obj, "prompt_id", json::value_t::string, loc).get<std::string>();
        set.model_id = require(obj, "model_id", json::value_t::string, loc).get<std::string>();
        set.rewards = finite_numbers(require(obj, "rewards", json::value_t::array, loc), "rewards", loc);
        if (set.rewards.empty()) throw DataError(loc + ": empty rewards");
        if (!keys.emplace(set.prompt_id, set.model_id).second)
            throw DataError(loc + ": duplicate (prompt, model) key " + set.prompt_id + "/" + set.model_id);
        out.push_back(std::move(set));
    });
    return out;
}

ModelPool load_pool(const std::filesystem::path& path) {
    const json doc = io::parse_json_file(path);
    const std::string loc = path.string();
    if (!doc.is_object()) throw DataError(loc + ": expected a JSON object");
    const json& models = require(doc, "models", json::value_t::array, loc);
    std::vector<PoolEntry> entries;
    for (const auto& m : models) {
        if (!m.is_object()) throw DataError(loc + ": model entries must be objects");
        PoolEntry e;
        e.model_id = require(m, "id", json::value_t::string, loc).get<std::string>();
        e.cost = require(m, "cost", json::value_t::number_float, loc).get<double>();
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw DataError(loc + ": model pool is empty");
    return ModelPool(std::move(entries));
}

std::optional<std::size_t> common_dim(std::span<const PromptRecord> prompts) {
    if (prompts.empty()) return std::nullopt;
    const auto d = static_cast<std::size_t>(prompts.front().embedding.size());
    for (const auto& p : prompts)
        if (static_cast<std::size_t>(p.embedding.size()) != d)
            throw DataError("prompt '" + p.id + "' has embedding dimension " + std::to_string(p.embedding.size()) +
                            ", expected " + std::to_string(d));
    return d;
}

double empirical_er(std::span<const double> rewards) {
    if (rewards.empty()) throw DataError("empty rewards");
    long double sum = 0.0L;
    for (double r : rewards) sum += r;
    return static_cast<double>(sum / static_cast<long double>(rewards.size()));
}

double empirical_er(const RewardSampleSet& samples) {
    if (samples.rewards.empty())
        throw DataError("empty rewards for " + samples.prompt_id + "/" + samples.model_id);
    return empirical_er(std::span<const double>(samples.rewards));
}

std::vector<PromptRecord> stratified_split(std::vector<PromptRecord> prompts, std::uint64_t seed,
                                           double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw UsageError("train fraction must lie strictly between 0 and 1");

    std::map<std::string, std::vector<std::size_t>> by_category;
    for (std::size_t i = 0; i < prompts.size(); ++i) by_category[prompts[i].category].push_back(i);

    for (auto& [category, members] : by_category) {
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return prompts[a].id < prompts[b].id; });
        auto eng = make_stream(seed, "split/" + category);
        std::shuffle(members.begin(), members.end(), eng);
        const double scaled = static_cast<double>(members.size()) * train_fraction;
        // Nudge absorbs binary representation error (0.29 * 100 = 28.999...).
        const auto n_train = static_cast<std::size_t>(std::floor(scaled * (1.0 + 1e-9)));
        for (std::size_t k = 0; k < members.size(); ++k)
            prompts[members[k]].split = k < n_train ? Split::Train : Split::Test;
    }
    return prompts;
}

namespace {
std::string key_of(std::string_view prompt_id, std::string_view model_id) {
    std::string k;
    k.reserve(prompt_id.size() + model_id.size() + 1);
    k.append(prompt_id).push_back('\0');
    k.append(model_id);
    return k;
}
}  // namespace

RewardIndex::RewardIndex(std::span<const RewardSampleSet> sets) {
    map_.reserve(sets.size());
    for (const auto& s : sets)
        if (!map_.emplace(key_of(s.prompt_id, s.model_id), &s).second)
            throw DataError("duplicate (prompt, model) key " + s.prompt_id + "/" + s.model_id);
}

const RewardSampleSet* RewardIndex::find(std::string_view prompt_id, std::string_view model_id) const {
    auto it = map_.find(key_of(prompt_id, model_id));
    return it == map_.end() ? nullptr : it->second;
}

const RewardSampleSet& RewardIndex::at(std::string_view prompt_id, std::string_view model_id) const {
    const auto* s = find(prompt_id, model_id);
    if (!s)
        throw DataError("missing reward samples for " + std::string(prompt_id) + "/" + std::string(model_id));
    return *s;
}

ERDataset build_er_dataset(std::span<const PromptRecord> prompts, const RewardIndex& index,
                           const std::string& model_id, std::optional<Split> split_filter) {
    std::vector<const PromptRecord*> rows;
    for (const auto& p : prompts)
        if (!split_filter || p.split == *split_filter) rows.push_back(&p);

    ERDataset ds;
    ds.model_id = model_id;
    const Eigen::Index d = rows.empty() ? 0 : rows.front()->embedding.size();
    ds.features.resize(static_cast<Eigen::Index>(rows.size()), d);
    ds.targets.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& p = *rows[i];
        if (p.embedding.size() != d)
            throw DataError("prompt '" + p.id + "' has embedding dimension " + std::to_string(p.embedding.size()) +
                            ", expected " + std::to_string(d));
        const auto i_ = static_cast<Eigen::Index>(i);
        ds.prompt_ids.push_back(p.id);
        ds.features.row(i_) = p.embedding.transpose();
        ds.targets(i_) = empirical_er(index.at(p.id, model_id));
    }
    return ds;
}

ERDataset build_er_dataset(std::span<const PromptRecord> prompts, std::span<const RewardSampleSet> sets,
                           const std::string& model_id, std::optional<Split> split_filter) {
    return build_er_dataset(prompts, RewardIndex(sets), model_id, split_filter);
}

std::vector<PromptRecord> filter_split(std::span<const PromptRecord> prompts, Split split) {
    std::vector<PromptRecord> out;
    for (const auto& p : prompts)
        if (p.split == split) out.push_back(p);
    return out;
}

}  // namespace erp
