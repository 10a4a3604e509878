#include "router.hpp"

#include <cmath>

#include "dataset.hpp"
#include "pipeline.hpp"
#include "routing.hpp"

namespace erp {

Router::Router(ModelPool pool, std::vector<LinearPredictor> predictors)
    : pool_(std::move(pool)), predictors_(std::move(predictors)) {
    if (pool_.empty()) throw DataError("router: empty model pool");
    if (predictors_.size() != pool_.size()) throw DataError("router: need exactly one predictor per pool model");
    dim_ = predictors_.front().dim();
    for (std::size_t j = 0; j < pool_.size(); ++j) {
        if (predictors_[j].model_id != pool_.id(j))
            throw DataError("router: predictor '" + predictors_[j].model_id + "' does not match pool model '" +
                            pool_.id(j) + "'");
        if (predictors_[j].dim() != dim_) throw DataError("router: predictor dimensions disagree");
    }
}

Router Router::load(const std::filesystem::path& predictors_dir, const std::filesystem::path& pool_path) {
    ModelPool pool = load_pool(pool_path);
    std::vector<LinearPredictor> predictors;
    for (const auto& e : pool.entries()) {
        const auto file = predictors_dir / pipeline::predictor_file_name(e.model_id);
        if (!std::filesystem::exists(file))
            throw DataError("missing predictor for pool model '" + e.model_id + "' (expected " + file.string() + ")");
        predictors.push_back(load_predictor(file));
    }
    return Router(std::move(pool), std::move(predictors));
}

RouteDecision Router::route(const Eigen::Ref<const Vector>& embedding, double lambda) const {
    if (static_cast<std::size_t>(embedding.size()) != dim_)
        throw DataError("embedding has dimension " + std::to_string(embedding.size()) + ", expected " +
                        std::to_string(dim_));
    if (!embedding.allFinite()) throw DataError("embedding contains non-finite values");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw UsageError("lambda must be a finite non-negative number");
    RouteDecision d;
    for (std::size_t j = 0; j < predictors_.size(); ++j) {
        const double v = predict(predictors_[j], embedding);
        d.predicted.push_back(v);
        d.adjusted.push_back(v - lambda * pool_.cost(j));
    }
    d.chosen = select_model(d.predicted, pool_, lambda);
    return d;
}

}  // namespace erp
