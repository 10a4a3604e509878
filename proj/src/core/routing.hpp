#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "dataset.hpp"
#include "model_pool.hpp"
#include "scoring.hpp"

namespace erp {

struct RoutingAssignment {
    std::vector<std::string> prompt_ids;
    std::vector<std::size_t> chosen;  // pool indices
    std::string policy_name;
    double lambda = 0.0;
};

/// argmax_i (scores[i] - lambda * cost_i). Exact ties go to the cheaper
/// model, then to the lower pool index.
std::size_t select_model(std::span<const double> scores, const ModelPool& pool, double lambda);

/// Cost-adjusted ERP policy over a predicted ER matrix.
RoutingAssignment route_erp(const ERMatrix& predicted, const ModelPool& pool, double lambda);

/// Exchange rate above which every prompt goes to the cheapest model:
/// (max value - min value) / (smallest nonzero cost gap). Zero when the pool
/// has a single cost level or the values are constant.
double auto_lambda_max(const Matrix& values, const ModelPool& pool);

/// {0} followed by `n` log-spaced rates on [lambda_max * 1e-3, lambda_max].
/// Collapses to {0} when lambda_max is zero.
std::vector<double> auto_lambda_grid(double lambda_max, std::size_t n = 32);

/// Linear-softmax router: logits = weights * [x; 1], one row per model.
struct ZooterModel {
    Matrix weights;  // M x (D+1), bias column last
    double temperature = 1.0;
    int iterations = 0;
    double grad_norm = 0.0;  // final gradient inf-norm

    std::size_t num_models() const noexcept { return static_cast<std::size_t>(weights.rows()); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(weights.cols() - 1); }
};

struct ZooterOptions {
    double temperature = 1.0;
    double l2 = 1e-5;
    double tolerance = 1e-4;
    int max_iterations = 20000;
};

/// softmax(rewards / temperature), computed stably.
Vector zooter_target(const Eigen::Ref<const Vector>& rewards, double temperature);

/// Fits the router by full-batch gradient descent from zero on
///   mean_x KL(softmax(r(x) / T) || softmax(W [x; 1])) + l2 |W|_F^2
/// with a fixed step 1/L, L a bound on the Hessian norm. Stops once the
/// gradient inf-norm reaches the tolerance or after max_iterations (the final
/// residual is kept in the model). `rewards` is n x M.
ZooterModel fit_zooter(const Matrix& features, const Matrix& rewards, const ZooterOptions& opts = {});

/// Mean KL objective (including the penalty) at the given weights.
double zooter_objective(const Matrix& weights, const Matrix& features, const Matrix& rewards, double temperature,
                        double l2);

Vector zooter_logits(const ZooterModel& z, const Eigen::Ref<const Vector>& x);

/// Logit matrix (prompts x models), same layout as an ERMatrix.
ERMatrix zooter_logit_matrix(const ZooterModel& z, const ModelPool& pool, std::span<const PromptRecord> prompts);

/// argmax_i (logit_i(x) - lambda * cost_i). Lambda is in logit units.
RoutingAssignment route_zooter(const ZooterModel& z, const ModelPool& pool, double lambda,
                               std::span<const PromptRecord> prompts);

RoutingAssignment route_fixed(std::size_t model_index, const ModelPool& pool, std::span<const std::string> prompt_ids);

/// i.i.d. uniform model choice per prompt.
RoutingAssignment route_random(const ModelPool& pool, std::span<const std::string> prompt_ids, std::uint64_t seed);

/// Seeded uniform shuffle of `chosen` across prompts; keeps the multiset.
RoutingAssignment permute_assignment(const RoutingAssignment& a, std::uint64_t seed);

/// category -> model index with the best mean cost-adjusted empirical reward
/// over the category's training prompts.
using CategoryTable = std::map<std::string, std::size_t>;

CategoryTable per_category_oracle(std::span<const PromptRecord> train_prompts, const ERMatrix& train_empirical,
                                  const ModelPool& pool, double lambda);

/// Per-category mean empirical ER (rows of the table behind the oracle).
std::map<std::string, Vector> category_means(std::span<const PromptRecord> train_prompts,
                                             const ERMatrix& train_empirical);

/// Routes by category label; an unseen category is a DataError.
RoutingAssignment route_by_category(const CategoryTable& table, std::span<const PromptRecord> prompts,
                                    double lambda);

}  // namespace erp
