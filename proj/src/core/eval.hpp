#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "model_pool.hpp"
#include "routing.hpp"
#include "scoring.hpp"

namespace erp {

struct ParetoPoint {
    std::string policy_name;
    double lambda = 0.0;
    double mean_cost = 0.0;
    double mean_regret = 0.0;
};

/// Per-prompt regret against the empirical matrix: row max minus the value of
/// the chosen model.
std::vector<double> regret(const ERMatrix& empirical, const RoutingAssignment& assignment);

double mean_regret(const ERMatrix& empirical, const RoutingAssignment& assignment);
double mean_cost(const RoutingAssignment& assignment, const ModelPool& pool);

using PolicyAtLambda = std::function<RoutingAssignment(double lambda)>;

/// One Pareto point per lambda, in grid order.
std::vector<ParetoPoint> sweep(const std::string& policy_name, const PolicyAtLambda& policy,
                               std::span<const double> lambdas, const ERMatrix& empirical, const ModelPool& pool);

/// Non-dominated subset sorted by cost (then regret). Exact duplicates
/// collapse to the first occurrence.
std::vector<ParetoPoint> pareto_frontier(std::span<const ParetoPoint> points);

std::string pareto_csv(std::span<const ParetoPoint> points);
std::string assignment_csv_header();
/// Rows "prompt_id,policy,lambda,chosen_model_id" without header.
std::string assignment_csv_rows(const RoutingAssignment& a, const ModelPool& pool);

struct WinRateTable {
    std::string category;
    std::vector<double> win_fraction;  // pool order, sums to 1
    Provenance provenance = Provenance::Empirical;
};

/// Fraction of prompts per category on which each model attains the row
/// maximum; tied maxima split the prompt's unit of credit equally.
/// `categories` is aligned with the matrix rows. Output is sorted by category.
std::vector<WinRateTable> win_rate_table(const ERMatrix& m, std::span<const std::string> categories);

inline const std::string kAggregate = "Aggregate";

/// R^2 within each category plus "Aggregate" over everything. A category
/// whose targets are constant maps to nullopt (R^2 undefined there).
std::map<std::string, std::optional<double>> per_category_r2(std::span<const double> predictions,
                                                             std::span<const double> targets,
                                                             std::span<const std::string> categories);

/// 1 - exp(-gap^2 / (4 sigma^2)): win-probability lower bound for
/// sigma^2-subgaussian reward distributions whose means differ by `gap`.
double prop1_bound(double er_gap, double sigma);

enum class RewardFamily { Gaussian, Bounded };

struct Prop1Result {
    double empirical = 0.0;  // fraction of draws with r1 > r0
    double bound = 0.0;
    double slack = 0.0;  // 4 * sqrt(0.25 / n)
    bool satisfied = false;
};

/// Draws n independent (r0, r1) pairs with means mu0, mu1 and variance proxy
/// sigma^2. Gaussian uses N(mu, sigma^2); Bounded uses mu +/- sigma with equal
/// probability (also sigma^2-subgaussian).
Prop1Result prop1_monte_carlo(double mu0, double mu1, double sigma, std::uint64_t n, std::uint64_t seed,
                              RewardFamily family = RewardFamily::Gaussian);

}  // namespace erp
