#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"

namespace erp {

struct PoolEntry {
    std::string model_id;
    double cost = 0.0;
};

/// Ordered model pool. Entry order is the model index used everywhere else.
class ModelPool {
public:
    ModelPool() = default;
    explicit ModelPool(std::vector<PoolEntry> entries);

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const PoolEntry& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<PoolEntry>& entries() const noexcept { return entries_; }

    const std::string& id(std::size_t i) const { return entries_.at(i).model_id; }
    double cost(std::size_t i) const { return entries_.at(i).cost; }
    std::optional<std::size_t> index_of(std::string_view model_id) const;
    std::vector<std::string> ids() const;

    double min_cost() const;
    double max_cost() const;
    /// Lowest-cost model; ties go to the lowest index.
    std::size_t cheapest() const;
    /// Smallest positive difference between two costs, or 0 if all are equal.
    double min_cost_gap() const;

private:
    std::vector<PoolEntry> entries_;
};

}  // namespace erp
