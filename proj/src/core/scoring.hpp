#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "dataset.hpp"
#include "model_pool.hpp"
#include "ridge.hpp"

namespace erp {

enum class Provenance { Predicted, Empirical };

/// Prompt x model table of expected rewards (columns in pool order).
struct ERMatrix {
    std::vector<std::string> prompt_ids;
    std::vector<std::string> model_ids;
    Matrix values;
    Provenance provenance = Provenance::Predicted;

    std::size_t rows() const noexcept { return prompt_ids.size(); }
    std::size_t cols() const noexcept { return model_ids.size(); }
};

/// values(i, j) = predict(predictors[j], prompts[i].embedding). Predictors must
/// be given in pool order.
ERMatrix predict_matrix(std::span<const LinearPredictor> predictors, const ModelPool& pool,
                        std::span<const PromptRecord> prompts);

/// values(i, j) = empirical_er of the samples of prompt i under model j.
ERMatrix empirical_matrix(std::span<const PromptRecord> prompts, const RewardIndex& index, const ModelPool& pool);

/// CSV: "prompt_id,<model_1>,...", one row per prompt, 17 significant digits.
std::string er_matrix_csv(const ERMatrix& m);

/// Logistic sigmoid of (er_a - er_b): predicted probability that a beats b.
double pairwise_win_score(double er_a, double er_b);

/// Area under the ROC curve as the Mann-Whitney statistic with half credit
/// for tied scores. Throws DataError unless both classes are present.
double auroc(std::span<const double> scores, const std::vector<bool>& labels);

enum class LabelMode { Sample, Mean };

/// Ground-truth "a beats b" label: one seeded uniform draw from each sample
/// set, compared strictly. In Mean mode the empirical means are compared.
bool pairwise_win_label(const RewardSampleSet& a, const RewardSampleSet& b, std::uint64_t seed,
                        LabelMode mode = LabelMode::Sample);

struct LogisticFit {
    Vector weights;  // D coefficients followed by the bias
    int iterations = 0;
    double grad_norm = 0.0;
};

struct LogisticOptions {
    double tolerance = 1e-6;
    int max_iterations = 500;
};

/// L2-regularized logistic regression, mean log-loss + l2 * |w|^2 (bias not
/// penalized), solved by damped Newton iterations from zero. Throws
/// NumericalError if the gradient inf-norm does not reach the tolerance.
LogisticFit fit_pairwise_logistic(const Matrix& features, const std::vector<bool>& labels, double l2,
                                  const LogisticOptions& opts = {});

/// P(label = true | x) under a fitted classifier.
double logistic_probability(const LogisticFit& fit, const Eigen::Ref<const Vector>& x);

}  // namespace erp
