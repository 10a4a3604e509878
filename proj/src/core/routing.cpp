#include "routing.hpp"

#include <algorithm>
#include <cmath>

namespace erp {

std::size_t select_model(std::span<const double> scores, const ModelPool& pool, double lambda) {
    if (scores.size() != pool.size() || pool.empty())
        throw DataError("score vector length " + std::to_string(scores.size()) + " does not match pool size " +
                        std::to_string(pool.size()));
    std::size_t best = 0;
    double best_score = scores[0] - lambda * pool.cost(0);
    for (std::size_t i = 1; i < scores.size(); ++i) {
        const double s = scores[i] - lambda * pool.cost(i);
        if (s > best_score || (s == best_score && pool.cost(i) < pool.cost(best))) {
            best = i;
            best_score = s;
        }
    }
    return best;
}

namespace {

void check_lambda(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw UsageError("lambda must be a finite non-negative number");
}

RoutingAssignment route_matrix(const Matrix& values, std::span<const std::string> prompt_ids, const ModelPool& pool,
                               double lambda, std::string policy) {
    check_lambda(lambda);
    if (static_cast<std::size_t>(values.cols()) != pool.size())
        throw DataError("score matrix has " + std::to_string(values.cols()) + " columns, pool has " +
                        std::to_string(pool.size()) + " models");
    RoutingAssignment a;
    a.policy_name = std::move(policy);
    a.lambda = lambda;
    a.prompt_ids.assign(prompt_ids.begin(), prompt_ids.end());
    a.chosen.resize(prompt_ids.size());
    std::vector<double> row(pool.size());
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) row[static_cast<std::size_t>(j)] = values(i, j);
        a.chosen[static_cast<std::size_t>(i)] = select_model(row, pool, lambda);
    }
    return a;
}

}  // namespace

RoutingAssignment route_erp(const ERMatrix& predicted, const ModelPool& pool, double lambda) {
    if (predicted.model_ids != pool.ids()) throw DataError("ER matrix columns do not follow pool order");
    return route_matrix(predicted.values, predicted.prompt_ids, pool, lambda, "erp");
}

double auto_lambda_max(const Matrix& values, const ModelPool& pool) {
    const double gap = pool.min_cost_gap();
    if (gap == 0.0 || values.size() == 0) return 0.0;
    return (values.maxCoeff() - values.minCoeff()) / gap;
}

std::vector<double> auto_lambda_grid(double lambda_max, std::size_t n) {
    std::vector<double> grid{0.0};
    if (!(lambda_max > 0.0) || n == 0) return grid;
    const double lo = std::log10(lambda_max) - 3.0;
    const double hi = std::log10(lambda_max);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = n == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(n - 1);
        grid.push_back(k + 1 == n ? lambda_max : std::pow(10.0, lo + t * (hi - lo)));
    }
    return grid;
}

Vector zooter_target(const Eigen::Ref<const Vector>& rewards, double temperature) {
    if (!(temperature > 0.0)) throw UsageError("zooter temperature must be positive");
    const Vector scaled = rewards / temperature;
    if (!scaled.allFinite())
        throw NumericalError("zooter target overflowed (rewards / temperature not finite); use a larger temperature");
    const Vector e = (scaled.array() - scaled.maxCoeff()).exp().matrix();
    return e / e.sum();
}

namespace {

Matrix augment(const Matrix& features) {
    Matrix a(features.rows(), features.cols() + 1);
    a.leftCols(features.cols()) = features;
    a.col(features.cols()).setOnes();
    return a;
}

// Row-wise log-softmax of the logits.
Matrix log_softmax_rows(const Matrix& logits) {
    Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
        out.row(i) = logits.row(i).array() - lse;
    }
    return out;
}

Matrix targets_of(const Matrix& rewards, double temperature) {
    Matrix t(rewards.rows(), rewards.cols());
    for (Eigen::Index i = 0; i < rewards.rows(); ++i) t.row(i) = zooter_target(rewards.row(i).transpose(), temperature);
    return t;
}

double kl_objective(const Matrix& weights, const Matrix& design, const Matrix& targets, double l2) {
    const Matrix log_p = log_softmax_rows(design * weights.transpose());
    double kl = 0.0;
    for (Eigen::Index i = 0; i < targets.rows(); ++i)
        for (Eigen::Index j = 0; j < targets.cols(); ++j) {
            const double t = targets(i, j);
            if (t > 0.0) kl += t * (std::log(t) - log_p(i, j));
        }
    return kl / static_cast<double>(targets.rows()) + l2 * weights.squaredNorm();
}

}  // namespace

double zooter_objective(const Matrix& weights, const Matrix& features, const Matrix& rewards, double temperature,
                        double l2) {
    return kl_objective(weights, augment(features), targets_of(rewards, temperature), l2);
}

ZooterModel fit_zooter(const Matrix& features, const Matrix& rewards, const ZooterOptions& opts) {
    const Eigen::Index n = features.rows();
    const Eigen::Index m = rewards.cols();
    if (n == 0) throw DataError("zooter: no training prompts");
    if (rewards.rows() != n) throw DataError("zooter: features and rewards differ in row count");
    if (m == 0) throw DataError("zooter: no models");
    if (!(opts.l2 >= 0.0)) throw UsageError("zooter: l2 must be non-negative");

    const Matrix design = augment(features);
    const Matrix targets = targets_of(rewards, opts.temperature);

    // The softmax cross-entropy Hessian is bounded by 1/2 * (A^T A / n) per
    // output row, so 1/L with this L is a safe fixed step.
    const Matrix gram = design.transpose() * design / static_cast<double>(n);
    const double top = Eigen::SelfAdjointEigenSolver<Matrix>(gram, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    const double lipschitz = 0.5 * top + 2.0 * opts.l2;
    const double step = 1.0 / lipschitz;

    ZooterModel z;
    z.temperature = opts.temperature;
    z.weights = Matrix::Zero(m, design.cols());
    for (int it = 0;; ++it) {
        const Matrix probs = log_softmax_rows(design * z.weights.transpose()).array().exp().matrix();
        if (!probs.allFinite())
            throw NumericalError("zooter: non-finite loss during training; use a larger temperature");
        Matrix grad = (probs - targets).transpose() * design / static_cast<double>(n);
        grad += 2.0 * opts.l2 * z.weights;
        z.grad_norm = grad.lpNorm<Eigen::Infinity>();
        z.iterations = it;
        if (!std::isfinite(z.grad_norm))
            throw NumericalError("zooter: non-finite gradient during training; use a larger temperature");
        if (z.grad_norm <= opts.tolerance || it >= opts.max_iterations) break;
        z.weights -= step * grad;
    }
    const double loss = kl_objective(z.weights, design, targets, opts.l2);
    if (!std::isfinite(loss)) throw NumericalError("zooter: non-finite loss; use a larger temperature");
    return z;
}

Vector zooter_logits(const ZooterModel& z, const Eigen::Ref<const Vector>& x) {
    if (static_cast<std::size_t>(x.size()) != z.dim())
        throw DataError("zooter: embedding dimension " + std::to_string(x.size()) + " does not match " +
                        std::to_string(z.dim()));
    const auto d = static_cast<Eigen::Index>(z.dim());
    return z.weights.leftCols(d) * x + z.weights.col(d);
}

ERMatrix zooter_logit_matrix(const ZooterModel& z, const ModelPool& pool, std::span<const PromptRecord> prompts) {
    if (z.num_models() != pool.size()) throw DataError("zooter model size does not match pool size");
    ERMatrix out;
    out.provenance = Provenance::Predicted;
    out.model_ids = pool.ids();
    out.values.resize(static_cast<Eigen::Index>(prompts.size()), static_cast<Eigen::Index>(pool.size()));
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        out.prompt_ids.push_back(prompts[i].id);
        out.values.row(static_cast<Eigen::Index>(i)) = zooter_logits(z, prompts[i].embedding).transpose();
    }
    return out;
}

RoutingAssignment route_zooter(const ZooterModel& z, const ModelPool& pool, double lambda,
                               std::span<const PromptRecord> prompts) {
    const ERMatrix logits = zooter_logit_matrix(z, pool, prompts);
    return route_matrix(logits.values, logits.prompt_ids, pool, lambda, "zooter");
}

RoutingAssignment route_fixed(std::size_t model_index, const ModelPool& pool, std::span<const std::string> prompt_ids) {
    if (model_index >= pool.size())
        throw UsageError("fixed route: model index " + std::to_string(model_index) + " out of range for pool of " +
                         std::to_string(pool.size()));
    RoutingAssignment a;
    a.policy_name = "fixed:" + pool.id(model_index);
    a.prompt_ids.assign(prompt_ids.begin(), prompt_ids.end());
    a.chosen.assign(prompt_ids.size(), model_index);
    return a;
}

RoutingAssignment route_random(const ModelPool& pool, std::span<const std::string> prompt_ids, std::uint64_t seed) {
    if (pool.empty()) throw DataError("random route: empty pool");
    auto eng = make_stream(seed, "random-route");
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    RoutingAssignment a;
    a.policy_name = "random";
    a.prompt_ids.assign(prompt_ids.begin(), prompt_ids.end());
    a.chosen.reserve(prompt_ids.size());
    for (std::size_t i = 0; i < prompt_ids.size(); ++i) a.chosen.push_back(pick(eng));
    return a;
}

RoutingAssignment permute_assignment(const RoutingAssignment& a, std::uint64_t seed) {
    RoutingAssignment out = a;
    out.policy_name = "permutation";
    auto eng = make_stream(seed, "permute-assignment");
    std::shuffle(out.chosen.begin(), out.chosen.end(), eng);
    return out;
}

std::map<std::string, Vector> category_means(std::span<const PromptRecord> train_prompts,
                                             const ERMatrix& train_empirical) {
    if (train_empirical.rows() != train_prompts.size())
        throw DataError("per-category oracle: empirical matrix rows do not match training prompts");
    std::map<std::string, Vector> sums;
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < train_prompts.size(); ++i) {
        if (train_empirical.prompt_ids[i] != train_prompts[i].id)
            throw DataError("per-category oracle: prompt order mismatch at '" + train_prompts[i].id + "'");
        const Vector row = train_empirical.values.row(static_cast<Eigen::Index>(i)).transpose();
        auto [it, inserted] = sums.try_emplace(train_prompts[i].category, Vector::Zero(row.size()));
        it->second += row;
        ++counts[train_prompts[i].category];
    }
    for (auto& [cat, v] : sums) v /= static_cast<double>(counts[cat]);
    return sums;
}

CategoryTable per_category_oracle(std::span<const PromptRecord> train_prompts, const ERMatrix& train_empirical,
                                  const ModelPool& pool, double lambda) {
    check_lambda(lambda);
    CategoryTable table;
    for (const auto& [cat, means] : category_means(train_prompts, train_empirical))
        table[cat] = select_model(std::span<const double>(means.data(), static_cast<std::size_t>(means.size())), pool,
                                  lambda);
    return table;
}

RoutingAssignment route_by_category(const CategoryTable& table, std::span<const PromptRecord> prompts, double lambda) {
    RoutingAssignment a;
    a.policy_name = "oracle";
    a.lambda = lambda;
    for (const auto& p : prompts) {
        auto it = table.find(p.category);
        if (it == table.end())
            throw DataError("per-category oracle: category '" + p.category + "' of prompt '" + p.id +
                            "' has no training prompts");
        a.prompt_ids.push_back(p.id);
        a.chosen.push_back(it->second);
    }
    return a;
}

}  // namespace erp
