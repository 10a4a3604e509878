#include "model_pool.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace erp {

ModelPool::ModelPool(std::vector<PoolEntry> entries) : entries_(std::move(entries)) {
    std::unordered_set<std::string> seen;
    for (const auto& e : entries_) {
        if (e.model_id.empty()) throw DataError("model pool: empty model id");
        if (!seen.insert(e.model_id).second) throw DataError("model pool: duplicate model id '" + e.model_id + "'");
        if (!std::isfinite(e.cost) || e.cost <= 0.0)
            throw DataError("model pool: cost of '" + e.model_id + "' must be a positive finite number");
    }
}

std::optional<std::size_t> ModelPool::index_of(std::string_view model_id) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].model_id == model_id) return i;
    return std::nullopt;
}

std::vector<std::string> ModelPool::ids() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.model_id);
    return out;
}

double ModelPool::min_cost() const {
    if (entries_.empty()) throw DataError("model pool is empty");
    return entries_[cheapest()].cost;
}

double ModelPool::max_cost() const {
    if (entries_.empty()) throw DataError("model pool is empty");
    return std::max_element(entries_.begin(), entries_.end(),
                            [](const auto& a, const auto& b) { return a.cost < b.cost; })
        ->cost;
}

std::size_t ModelPool::cheapest() const {
    if (entries_.empty()) throw DataError("model pool is empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < entries_.size(); ++i)
        if (entries_[i].cost < entries_[best].cost) best = i;
    return best;
}

double ModelPool::min_cost_gap() const {
    std::vector<double> costs;
    for (const auto& e : entries_) costs.push_back(e.cost);
    std::sort(costs.begin(), costs.end());
    double gap = 0.0;
    for (std::size_t i = 1; i < costs.size(); ++i) {
        const double d = costs[i] - costs[i - 1];
        if (d > 0.0 && (gap == 0.0 || d < gap)) gap = d;
    }
    return gap;
}

}  // namespace erp
