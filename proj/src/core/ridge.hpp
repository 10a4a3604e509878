#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "common.hpp"
#include "dataset.hpp"
#include "io.hpp"

namespace erp {

/// Per-model expected-reward predictor: ER(x) = weights . x + bias.
struct LinearPredictor {
    std::string model_id;
    Vector weights;
    double bias = 0.0;
    double beta = 0.0;

    std::size_t dim() const noexcept { return static_cast<std::size_t>(weights.size()); }
};

constexpr double kDefaultBeta = 1.0;

/// Closed-form ridge fit. Minimizes
///   sum_i (w . x_i + b - y_i)^2 + beta * (|w|^2 + b^2)
/// through the normal equations of the design matrix augmented with a
/// constant-1 column, factorized with Cholesky. The bias is penalized like
/// every other coefficient.
///
/// Throws NumericalError when beta = 0 and the augmented Gram matrix is
/// singular (or numerically so), and DataError on empty data or non-finite
/// targets.
LinearPredictor fit_ridge(const ERDataset& data, double beta);

/// weights . x + bias; throws DataError on dimension mismatch.
double predict(const LinearPredictor& p, const Eigen::Ref<const Vector>& embedding);

/// 1 - SS_res / SS_tot against the targets' own mean. Can be negative.
/// Throws DataError when targets are all identical (SS_tot = 0).
double r_squared(std::span<const double> predictions, std::span<const double> targets);

io::json predictor_to_json(const LinearPredictor& p);
LinearPredictor predictor_from_json(const io::json& doc);

void save_predictor(const std::filesystem::path& path, const LinearPredictor& p,
                    const io::json& manifest = nullptr);
LinearPredictor load_predictor(const std::filesystem::path& path);

}  // namespace erp
