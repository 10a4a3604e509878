#pragma once

#include <filesystem>
#include <vector>

#include "model_pool.hpp"
#include "ridge.hpp"

namespace erp {

struct RouteDecision {
    std::size_t chosen = 0;
    std::vector<double> predicted;  // pool order
    std::vector<double> adjusted;   // predicted - lambda * cost
};

/// Trained predictors bound to a pool; the online counterpart of route_erp.
class Router {
public:
    Router(ModelPool pool, std::vector<LinearPredictor> predictors);

    /// Reads predictor_<model>.json for every pool model from `dir`.
    static Router load(const std::filesystem::path& predictors_dir, const std::filesystem::path& pool_path);

    const ModelPool& pool() const noexcept { return pool_; }
    const std::vector<LinearPredictor>& predictors() const noexcept { return predictors_; }
    std::size_t dim() const noexcept { return dim_; }

    RouteDecision route(const Eigen::Ref<const Vector>& embedding, double lambda) const;

private:
    ModelPool pool_;
    std::vector<LinearPredictor> predictors_;
    std::size_t dim_ = 0;
};

}  // namespace erp
