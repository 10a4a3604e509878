#include "eval.hpp"

#include <algorithm>
#include <cmath>

#include "io.hpp"
#include "ridge.hpp"

namespace erp {

namespace {
void check_alignment(const ERMatrix& empirical, const RoutingAssignment& a) {
    if (a.prompt_ids.size() != a.chosen.size()) throw DataError("assignment: prompt and choice counts differ");
    if (a.prompt_ids != empirical.prompt_ids)
        throw DataError("assignment '" + a.policy_name + "' is not aligned with the empirical matrix prompts");
    for (std::size_t c : a.chosen)
        if (c >= empirical.cols()) throw DataError("assignment '" + a.policy_name + "' has an out-of-range model index");
}
}  // namespace

std::vector<double> regret(const ERMatrix& empirical, const RoutingAssignment& assignment) {
    check_alignment(empirical, assignment);
    std::vector<double> out(assignment.chosen.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto row = empirical.values.row(static_cast<Eigen::Index>(i));
        out[i] = row.maxCoeff() - row(static_cast<Eigen::Index>(assignment.chosen[i]));
    }
    return out;
}

double mean_regret(const ERMatrix& empirical, const RoutingAssignment& assignment) {
    const auto r = regret(empirical, assignment);
    if (r.empty()) throw DataError("mean regret of an empty assignment");
    long double sum = 0.0L;
    for (double v : r) sum += v;
    return static_cast<double>(sum / static_cast<long double>(r.size()));
}

double mean_cost(const RoutingAssignment& assignment, const ModelPool& pool) {
    if (assignment.chosen.empty()) throw DataError("mean cost of an empty assignment");
    // Summing per-model counts in pool order makes the result independent of
    // prompt order, so permuted assignments have bit-identical mean cost.
    std::vector<std::size_t> counts(pool.size(), 0);
    for (std::size_t c : assignment.chosen) {
        if (c >= pool.size()) throw DataError("assignment '" + assignment.policy_name + "' has an out-of-range model index");
        ++counts[c];
    }
    long double sum = 0.0L;
    for (std::size_t j = 0; j < counts.size(); ++j) sum += static_cast<long double>(counts[j]) * pool.cost(j);
    return static_cast<double>(sum / static_cast<long double>(assignment.chosen.size()));
}

std::vector<ParetoPoint> sweep(const std::string& policy_name, const PolicyAtLambda& policy,
                               std::span<const double> lambdas, const ERMatrix& empirical, const ModelPool& pool) {
    std::vector<ParetoPoint> out;
    out.reserve(lambdas.size());
    for (double lambda : lambdas) {
        const RoutingAssignment a = policy(lambda);
        out.push_back({policy_name, lambda, mean_cost(a, pool), mean_regret(empirical, a)});
    }
    return out;
}

std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points) {
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].mean_cost != points[b].mean_cost) return points[a].mean_cost < points[b].mean_cost;
        return points[a].mean_regret < points[b].mean_regret;
    });
    std::vector<ParetoPoint> front;
    for (std::size_t idx : order) {
        const auto& p = points[idx];
        // Sorted by cost, so p survives iff it strictly improves on the best
        // regret seen so far.
        if (front.empty() || p.mean_regret < front.back().mean_regret) front.push_back(p);
    }
    return front;
}

std::string pareto_csv(std::span<const ParetoPoint> points) {
    std::string out = "policy,lambda,mean_cost,mean_regret\n";
    for (const auto& p : points)
        out += p.policy_name + "," + io::format17(p.lambda) + "," + io::format17(p.mean_cost) + "," +
               io::format17(p.mean_regret) + "\n";
    return out;
}

std::string assignment_csv_header() { return "prompt_id,policy,lambda,chosen_model_id\n"; }

std::string assignment_csv_rows(const RoutingAssignment& a, const ModelPool& pool) {
    std::string out;
    const std::string lam = io::format17(a.lambda);
    for (std::size_t i = 0; i < a.chosen.size(); ++i)
        out += a.prompt_ids[i] + "," + a.policy_name + "," + lam + "," + pool.id(a.chosen[i]) + "\n";
    return out;
}

std::vector<WinRateTable> win_rate_table(const ERMatrix& m, std::span<const std::string> categories) {
    if (categories.size() != m.rows()) throw DataError("win-rate table: categories not aligned with matrix rows");
    std::map<std::string, std::pair<Vector, std::size_t>> acc;
    const auto cols = static_cast<Eigen::Index>(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto row = m.values.row(static_cast<Eigen::Index>(i));
        const double best = row.maxCoeff();
        int n_best = 0;
        for (Eigen::Index j = 0; j < cols; ++j) n_best += row(j) == best ? 1 : 0;
        auto [it, _] = acc.try_emplace(categories[i], Vector::Zero(cols), 0);
        for (Eigen::Index j = 0; j < cols; ++j)
            if (row(j) == best) it->second.first(j) += 1.0 / n_best;
        ++it->second.second;
    }
    std::vector<WinRateTable> out;
    for (auto& [cat, v] : acc) {
        WinRateTable t;
        t.category = cat;
        t.provenance = m.provenance;
        const Vector frac = v.first / static_cast<double>(v.second);
        t.win_fraction.assign(frac.data(), frac.data() + frac.size());
        out.push_back(std::move(t));
    }
    return out;
}

std::map<std::string, std::optional<double>> per_category_r2(std::span<const double> predictions,
                                                             std::span<const double> targets,
                                                             std::span<const std::string> categories) {
    if (predictions.size() != targets.size() || categories.size() != targets.size())
        throw DataError("per-category R^2: inputs differ in length");
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> groups;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        auto& g = groups[categories[i]];
        g.first.push_back(predictions[i]);
        g.second.push_back(targets[i]);
    }
    auto safe_r2 = [](std::span<const double> p, std::span<const double> t) -> std::optional<double> {
        try {
            return r_squared(p, t);
        } catch (const DataError&) {
            return std::nullopt;
        }
    };
    std::map<std::string, std::optional<double>> out;
    out[kAggregate] = safe_r2(predictions, targets);
    for (const auto& [cat, g] : groups) out[cat] = safe_r2(g.first, g.second);
    return out;
}

double prop1_bound(double er_gap, double sigma) {
    if (!(sigma > 0.0)) throw UsageError("sigma must be positive");
    if (std::isinf(er_gap)) return 1.0;
    return -std::expm1(-(er_gap * er_gap) / (4.0 * sigma * sigma));
}

Prop1Result prop1_monte_carlo(double mu0, double mu1, double sigma, std::uint64_t n, std::uint64_t seed,
                              RewardFamily family) {
    if (n == 0) throw UsageError("Monte-Carlo sample count must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw UsageError("sigma must be a positive finite number");
    if (!std::isfinite(mu0) || !std::isfinite(mu1)) throw UsageError("means must be finite");

    auto eng = make_stream(seed, "prop1");
    std::uint64_t wins = 0;
    if (family == RewardFamily::Gaussian) {
        std::normal_distribution<double> r0(mu0, sigma), r1(mu1, sigma);
        for (std::uint64_t k = 0; k < n; ++k) {
            const double a = r0(eng);
            const double b = r1(eng);
            wins += b > a ? 1 : 0;
        }
    } else {
        std::bernoulli_distribution coin(0.5);
        for (std::uint64_t k = 0; k < n; ++k) {
            const double a = mu0 + (coin(eng) ? sigma : -sigma);
            const double b = mu1 + (coin(eng) ? sigma : -sigma);
            wins += b > a ? 1 : 0;
        }
    }
    Prop1Result r;
    r.empirical = static_cast<double>(wins) / static_cast<double>(n);
    r.bound = prop1_bound(mu1 - mu0, sigma);
    r.slack = 4.0 * std::sqrt(0.25 / static_cast<double>(n));
    r.satisfied = r.empirical >= r.bound - r.slack;
    return r;
}

}  // namespace erp
