#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "core/routing.hpp"

using namespace erp;

namespace {

ERMatrix matrix(const Matrix& values, const ModelPool& pool) {
    ERMatrix m;
    for (Eigen::Index i = 0; i < values.rows(); ++i) m.prompt_ids.push_back("p" + std::to_string(i));
    m.model_ids = pool.ids();
    m.values = values;
    return m;
}

ModelPool pool_with_costs(const std::vector<double>& costs) {
    std::vector<PoolEntry> e;
    for (std::size_t j = 0; j < costs.size(); ++j) e.push_back({"m" + std::to_string(j), costs[j]});
    return ModelPool(e);
}

std::vector<PromptRecord> prompts_from(const Matrix& x, const std::vector<std::string>& categories = {}) {
    std::vector<PromptRecord> out;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        PromptRecord p;
        p.id = "p" + std::to_string(i);
        p.category = categories.empty() ? "c" : categories[static_cast<std::size_t>(i)];
        p.embedding = x.row(i).transpose();
        out.push_back(p);
    }
    return out;
}

double mean_chosen_cost(const RoutingAssignment& a, const ModelPool& pool) {
    long double s = 0;
    for (auto c : a.chosen) s += pool.cost(c);
    return static_cast<double>(s / a.chosen.size());
}

}  // namespace

TEST_CASE("select_model examples and tie rule") {
    const auto pool = pool_with_costs({1, 2, 3});
    CHECK(select_model(std::vector<double>{0.1, 0.9, 0.5}, pool, 0.0) == 1);
    const auto two = pool_with_costs({7, 70});
    CHECK(select_model(std::vector<double>{1.0, 1.2}, two, 0.01) == 0);
    // Exact ties: cheaper model, then lower index.
    CHECK(select_model(std::vector<double>{0.5, 0.5, 0.5}, pool_with_costs({3, 1, 1}), 0.0) == 1);
    CHECK(select_model(std::vector<double>{0.5, 0.5}, pool_with_costs({2, 2}), 0.0) == 0);
}

TEST_CASE("route_erp limits") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2, 2);
    const auto pool = pool_with_costs({30, 5, 12, 5.5});
    const Matrix v = Matrix::NullaryExpr(300, 4, [&] { return u(rng); });
    const auto m = matrix(v, pool);

    const auto zero = route_erp(m, pool, 0.0);
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
        Eigen::Index best;
        v.row(i).maxCoeff(&best);
        CHECK(zero.chosen[static_cast<std::size_t>(i)] == static_cast<std::size_t>(best));
    }
    const double lmax = auto_lambda_max(v, pool);
    CHECK(lmax > 0);
    for (double lam : {lmax, 2 * lmax, 1e6 * lmax}) {
        const auto a = route_erp(m, pool, lam);
        CHECK(std::all_of(a.chosen.begin(), a.chosen.end(), [&](auto c) { return c == pool.cheapest(); }));
    }
    CHECK(zero.policy_name == "erp");
    CHECK_THROWS_AS(route_erp(m, pool_with_costs({1, 2, 3}), 0.0), DataError);
}

TEST_CASE("route_erp mean cost is non-increasing in lambda") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    for (int t = 0; t < 30; ++t) {
        const std::size_t models = 2 + rng() % 6;
        std::vector<double> costs;
        for (std::size_t j = 0; j < models; ++j) costs.push_back(1 + 99 * u(rng));
        const auto pool = pool_with_costs(costs);
        const auto m = matrix(Matrix::NullaryExpr(80, static_cast<Eigen::Index>(models), [&] { return u(rng); }), pool);
        const auto grid = auto_lambda_grid(auto_lambda_max(m.values, pool));
        double prev = INFINITY;
        for (double lam : grid) {
            const double c = mean_chosen_cost(route_erp(m, pool, lam), pool);
            CHECK(c <= prev);
            prev = c;
        }
    }
}

TEST_CASE("lambda = 0 routing ignores a per-row shift") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    const auto pool = pool_with_costs({1, 2, 3, 4, 5});
    Matrix v = Matrix::NullaryExpr(200, 5, [&] { return g(rng); });
    const auto base = route_erp(matrix(v, pool), pool, 0.0);
    for (Eigen::Index i = 0; i < v.rows(); ++i) v.row(i).array() += 0.5 * static_cast<double>(i % 9);
    CHECK(route_erp(matrix(v, pool), pool, 0.0).chosen == base.chosen);
}

TEST_CASE("auto lambda grid") {
    const auto pool = pool_with_costs({1, 3, 10});
    Matrix v(2, 3);
    v << 0.0, 1.0, 2.0, 0.5, 0.5, 0.5;
    CHECK(auto_lambda_max(v, pool) == 1.0);  // spread 2 over gap 2
    const auto grid = auto_lambda_grid(1.0, 32);
    REQUIRE(grid.size() == 33);
    CHECK(grid[0] == 0.0);
    CHECK(grid[1] == doctest::Approx(1e-3));
    CHECK(grid.back() == 1.0);
    CHECK(std::is_sorted(grid.begin(), grid.end()));
    CHECK(auto_lambda_grid(0.0) == std::vector<double>{0.0});
    CHECK(auto_lambda_max(v, pool_with_costs({4, 4, 4})) == 0.0);
}

TEST_CASE("zooter_target") {
    const Vector r = (Vector(3) << 1.0, 2.0, 3.0).finished();
    const Vector p = zooter_target(r, 1.0);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p(2) / p(1) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    const Vector cold = zooter_target(r, 1e-3);
    CHECK(cold(2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cold(0) < 1e-300);
    const Vector big = zooter_target((Vector(2) << 1e6, 0.0).finished(), 1e-3);
    CHECK(big(0) == 1.0);
    CHECK_THROWS_AS(zooter_target(r, 0.0), UsageError);
    CHECK_THROWS_AS(zooter_target((Vector(2) << 1e308, -1e308).finished(), 1e-10), NumericalError);
}

TEST_CASE("zooter bias-only fit recovers the shared target distribution") {
    const auto pool = pool_with_costs({1, 2, 3});
    const Matrix x = Matrix::Zero(50, 4);
    Matrix r(50, 3);
    r.rowwise() = (Eigen::RowVectorXd(3) << 0.2, 0.9, 0.5).finished();
    ZooterOptions opts;
    opts.l2 = 0.0;
    opts.tolerance = 1e-10;
    opts.max_iterations = 200000;
    const auto z = fit_zooter(x, r, opts);
    const Vector logits = zooter_logits(z, Vector::Zero(4));
    Vector soft = (logits.array() - logits.maxCoeff()).exp();
    soft /= soft.sum();
    const Vector target = zooter_target(r.row(0).transpose(), 1.0);
    CHECK((soft - target).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(z.weights.leftCols(4).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zooter with uniform targets stays at zero and routes to the cheapest model") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    const auto pool = pool_with_costs({5, 2, 9});
    const Matrix x = Matrix::NullaryExpr(40, 3, [&] { return g(rng); });
    const Matrix r = Matrix::Constant(40, 3, 0.7);
    const auto z = fit_zooter(x, r);
    CHECK(z.weights.cwiseAbs().maxCoeff() == 0.0);
    const auto prompts = prompts_from(x);
    const auto a = route_zooter(z, pool, 0.1, prompts);
    CHECK(std::all_of(a.chosen.begin(), a.chosen.end(), [](auto c) { return c == 1; }));

    const auto single = pool_with_costs({3});
    const auto z1 = fit_zooter(x, Matrix::Constant(40, 1, 0.1));
    const auto a1 = route_zooter(z1, single, 0.0, prompts);
    CHECK(std::all_of(a1.chosen.begin(), a1.chosen.end(), [](auto c) { return c == 0; }));
}

TEST_CASE("zooter: lambda = 0 routes by most probable model and training lowers the objective") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> g;
    const auto pool = pool_with_costs({1, 2, 3, 4});
    const Matrix x = Matrix::NullaryExpr(120, 5, [&] { return g(rng); });
    const Matrix theta = Matrix::NullaryExpr(5, 4, [&] { return g(rng); });
    const Matrix r = x * theta;
    const auto z = fit_zooter(x, r);
    CHECK(z.iterations > 0);
    CHECK(zooter_objective(z.weights, x, r, 1.0, 1e-5) <
          zooter_objective(Matrix::Zero(4, 6), x, r, 1.0, 1e-5));

    const auto prompts = prompts_from(x);
    const auto a = route_zooter(z, pool, 0.0, prompts);
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        const Vector l = zooter_logits(z, prompts[i].embedding);
        Vector p = (l.array() - l.maxCoeff()).exp();
        p /= p.sum();
        Eigen::Index best;
        p.maxCoeff(&best);
        CHECK(a.chosen[i] == static_cast<std::size_t>(best));
    }
    const auto lm = zooter_logit_matrix(z, pool, prompts);
    CHECK(lm.values.rows() == 120);
    CHECK(lm.values.row(3).transpose() == zooter_logits(z, prompts[3].embedding));
}

TEST_CASE("fixed routing") {
    const auto pool = pool_with_costs({1, 2, 3});
    const std::vector<std::string> ids{"a", "b", "c"};
    CHECK(route_fixed(2, pool, ids).chosen == std::vector<std::size_t>{2, 2, 2});
    CHECK(route_fixed(0, pool, std::vector<std::string>{}).chosen.empty());
    CHECK_THROWS_AS(route_fixed(3, pool, ids), UsageError);
}

TEST_CASE("random routing") {
    const auto pool = pool_with_costs({1, 2, 3, 4});
    std::vector<std::string> ids(100000);
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = "p" + std::to_string(i);
    const auto a = route_random(pool, ids, 42);
    CHECK(a.chosen == route_random(pool, ids, 42).chosen);
    CHECK(a.chosen != route_random(pool, ids, 43).chosen);
    std::vector<double> freq(4, 0);
    for (auto c : a.chosen) freq[c] += 1;
    const double n = static_cast<double>(ids.size());
    const double sd = std::sqrt(n * 0.25 * 0.75);
    for (double f : freq) CHECK(std::fabs(f - n * 0.25) <= 3 * sd);

    const auto one = route_random(pool_with_costs({1}), ids, 42);
    CHECK(std::all_of(one.chosen.begin(), one.chosen.end(), [](auto c) { return c == 0; }));
}

TEST_CASE("permute_assignment keeps the multiset") {
    RoutingAssignment a;
    a.policy_name = "erp";
    a.prompt_ids = {"a", "b", "c"};
    a.chosen = {0, 1, 2};
    const auto p = permute_assignment(a, 1);
    auto sorted = p.chosen;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == a.chosen);
    CHECK(p.prompt_ids == a.prompt_ids);
    CHECK(p.chosen == permute_assignment(a, 1).chosen);
    CHECK(p.policy_name == "permutation");

    RoutingAssignment single = a;
    single.prompt_ids = {"a"};
    single.chosen = {4};
    CHECK(permute_assignment(single, 9).chosen == std::vector<std::size_t>{4});

    std::mt19937_64 rng(5);
    RoutingAssignment big;
    for (int i = 0; i < 500; ++i) {
        big.prompt_ids.push_back("p" + std::to_string(i));
        big.chosen.push_back(rng() % 7);
    }
    auto x = permute_assignment(big, 3).chosen, y = big.chosen;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    CHECK(x == y);
}

TEST_CASE("per-category oracle") {
    const auto two = pool_with_costs({7, 70});
    Matrix v(2, 2);
    v << 0.2, 0.8, 0.2, 0.8;
    const auto prompts = prompts_from(Matrix::Zero(2, 1));
    auto table = per_category_oracle(prompts, matrix(v, two), two, 0.0);
    CHECK(table.at("c") == 1);

    v << 1.0, 1.1, 1.0, 1.1;
    table = per_category_oracle(prompts, matrix(v, two), two, 0.01);
    CHECK(table.at("c") == 0);
    CHECK(category_means(prompts, matrix(v, two)).at("c")(1) == doctest::Approx(1.1));

    auto unseen = prompts;
    unseen[1].category = "unseen";
    CHECK_THROWS_AS(route_by_category(table, unseen, 0.01), DataError);
    const auto routed = route_by_category(table, prompts, 0.01);
    CHECK(routed.chosen == std::vector<std::size_t>{0, 0});
    CHECK(routed.policy_name == "oracle");
}
