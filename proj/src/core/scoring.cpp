#include "scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "io.hpp"

namespace erp {

ERMatrix predict_matrix(std::span<const LinearPredictor> predictors, const ModelPool& pool,
                        std::span<const PromptRecord> prompts) {
    if (predictors.size() != pool.size())
        throw DataError("expected " + std::to_string(pool.size()) + " predictors (one per pool model), got " +
                        std::to_string(predictors.size()));
    for (std::size_t j = 0; j < pool.size(); ++j)
        if (predictors[j].model_id != pool.id(j))
            throw DataError("predictor " + std::to_string(j) + " is for '" + predictors[j].model_id +
                            "' but the pool has '" + pool.id(j) + "' at that position");

    ERMatrix m;
    m.provenance = Provenance::Predicted;
    m.model_ids = pool.ids();
    m.values.resize(static_cast<Eigen::Index>(prompts.size()), static_cast<Eigen::Index>(pool.size()));
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        m.prompt_ids.push_back(prompts[i].id);
        for (std::size_t j = 0; j < predictors.size(); ++j)
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                predict(predictors[j], prompts[i].embedding);
    }
    return m;
}

ERMatrix empirical_matrix(std::span<const PromptRecord> prompts, const RewardIndex& index, const ModelPool& pool) {
    ERMatrix m;
    m.provenance = Provenance::Empirical;
    m.model_ids = pool.ids();
    m.values.resize(static_cast<Eigen::Index>(prompts.size()), static_cast<Eigen::Index>(pool.size()));
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        m.prompt_ids.push_back(prompts[i].id);
        for (std::size_t j = 0; j < pool.size(); ++j)
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                empirical_er(index.at(prompts[i].id, pool.id(j)));
    }
    return m;
}

std::string er_matrix_csv(const ERMatrix& m) {
    std::string out = "prompt_id";
    for (const auto& id : m.model_ids) out += "," + id;
    out += "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out += m.prompt_ids[i];
        for (std::size_t j = 0; j < m.cols(); ++j)
            out += "," + io::format17(m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out += "\n";
    }
    return out;
}

double pairwise_win_score(double er_a, double er_b) {
    const double d = er_a - er_b;
    // Evaluate on the side where exp() cannot overflow.
    if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
    const double e = std::exp(d);
    return e / (1.0 + e);
}

double auroc(std::span<const double> scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) throw DataError("auroc: scores and labels differ in length");
    const std::size_t n = scores.size();
    std::uint64_t n_pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(scores[i])) throw DataError("auroc: non-finite score");
        n_pos += labels[i] ? 1 : 0;
    }
    const std::uint64_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DataError("auroc: need at least one positive and one negative label");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Twice the 1-based mid-rank of a tie group spanning sorted positions
    // [lo, hi) is lo + hi + 1; kept integral so the statistic is exact.
    std::uint64_t pos_rank_sum_x2 = 0;
    for (std::size_t lo = 0; lo < n;) {
        std::size_t hi = lo + 1;
        while (hi < n && scores[order[hi]] == scores[order[lo]]) ++hi;
        const std::uint64_t rank_x2 = lo + hi + 1;
        for (std::size_t k = lo; k < hi; ++k)
            if (labels[order[k]]) pos_rank_sum_x2 += rank_x2;
        lo = hi;
    }
    const std::uint64_t u_x2 = pos_rank_sum_x2 - n_pos * (n_pos + 1);
    return static_cast<double>(u_x2) / static_cast<double>(2 * n_pos * n_neg);
}

bool pairwise_win_label(const RewardSampleSet& a, const RewardSampleSet& b, std::uint64_t seed, LabelMode mode) {
    if (a.prompt_id != b.prompt_id)
        throw DataError("pairwise label: prompt mismatch ('" + a.prompt_id + "' vs '" + b.prompt_id + "')");
    if (a.rewards.empty() || b.rewards.empty()) throw DataError("pairwise label: empty rewards");
    if (mode == LabelMode::Mean) return empirical_er(a) > empirical_er(b);
    auto eng = make_stream(seed, "label-draw");
    std::uniform_int_distribution<std::size_t> pick_a(0, a.rewards.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_b(0, b.rewards.size() - 1);
    const double ra = a.rewards[pick_a(eng)];
    const double rb = b.rewards[pick_b(eng)];
    return ra > rb;
}

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) { return pairwise_win_score(z, 0.0); }

struct LogisticProblem {
    const Matrix& design;  // n x (D+1), last column ones
    const Vector& y;       // 0/1
    double l2;

    double objective(const Vector& w) const {
        const Vector z = design * w;
        double loss = 0.0;
        for (Eigen::Index i = 0; i < z.size(); ++i) loss += softplus(z(i)) - y(i) * z(i);
        const auto d = w.size() - 1;
        return loss / static_cast<double>(z.size()) + l2 * w.head(d).squaredNorm();
    }

    Vector gradient(const Vector& w, Vector& probs) const {
        const Vector z = design * w;
        probs = z.unaryExpr([](double v) { return sigmoid(v); });
        Vector g = design.transpose() * (probs - y) / static_cast<double>(z.size());
        const auto d = w.size() - 1;
        g.head(d) += 2.0 * l2 * w.head(d);
        return g;
    }
};

}  // namespace

LogisticFit fit_pairwise_logistic(const Matrix& features, const std::vector<bool>& labels, double l2,
                                  const LogisticOptions& opts) {
    const Eigen::Index n = features.rows();
    const Eigen::Index d = features.cols();
    if (static_cast<std::size_t>(n) != labels.size()) throw DataError("logistic: features and labels differ in length");
    if (!(l2 > 0.0)) throw UsageError("logistic: l2 must be positive");
    bool any_pos = false, any_neg = false;
    for (bool b : labels) (b ? any_pos : any_neg) = true;
    if (!any_pos || !any_neg) throw DataError("logistic: both classes must be present");

    Matrix design(n, d + 1);
    design.leftCols(d) = features;
    design.col(d).setOnes();
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;

    const LogisticProblem prob{design, y, l2};
    LogisticFit fit;
    fit.weights = Vector::Zero(d + 1);
    Vector probs;
    double f = prob.objective(fit.weights);
    for (int it = 0;; ++it) {
        const Vector g = prob.gradient(fit.weights, probs);
        fit.grad_norm = g.lpNorm<Eigen::Infinity>();
        fit.iterations = it;
        if (fit.grad_norm <= opts.tolerance) return fit;
        if (it >= opts.max_iterations) break;

        const Vector s = (probs.array() * (1.0 - probs.array())).matrix();
        Matrix hess = design.transpose() * s.asDiagonal() * design / static_cast<double>(n);
        hess.diagonal().head(d).array() += 2.0 * l2;
        hess.diagonal().array() += 1e-12;
        const Vector step = hess.ldlt().solve(-g);

        // Backtracking (Armijo) on the objective.
        double t = 1.0;
        const double slope = g.dot(step);
        Vector next;
        double f_next = f;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            next = fit.weights + t * step;
            f_next = prob.objective(next);
            if (f_next <= f + 1e-4 * t * slope) break;
        }
        if (!(f_next <= f)) break;  // no progress possible in floating point
        fit.weights = next;
        f = f_next;
    }
    throw NumericalError("logistic regression did not converge: gradient inf-norm " + io::format17(fit.grad_norm) +
                         " after " + std::to_string(fit.iterations) + " iterations");
}

double logistic_probability(const LogisticFit& fit, const Eigen::Ref<const Vector>& x) {
    const auto d = fit.weights.size() - 1;
    if (x.size() != d) throw DataError("logistic: feature dimension mismatch");
    return sigmoid(fit.weights.head(d).dot(x) + fit.weights(d));
}

}  // namespace erp
