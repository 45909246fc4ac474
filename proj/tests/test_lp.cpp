#include <doctest.h>

#include "support/lp_oracle.hpp"
#include "support/random_lp.hpp"
#include "vbounds/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace vbounds::lp;

namespace {

LinearProgram explicit_lp(Sense sense, std::vector<Row> rows, std::vector<double> cost,
                          std::vector<std::vector<double>> cols) {
    return testlp::Dense{sense, std::move(rows), std::move(cost), std::move(cols)}.program();
}

}  // namespace

TEST_CASE("trivial maximization") {
    auto lp = explicit_lp(Sense::maximize, {{Relation::eq, 1}}, {1, 1}, {{1}, {1}});
    auto s = solve(lp);
    CHECK(s.status == Status::optimal);
    CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-12));
    double total = 0;
    for (auto e : s.support) total += e.weight;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("contradictory equality rows are infeasible") {
    auto lp = explicit_lp(Sense::minimize, {{Relation::eq, 1}, {Relation::eq, 2}}, {1, 2, 3},
                          {{1, 1}, {1, 1}, {1, 1}});
    CHECK(solve(lp).status == Status::infeasible);
}

TEST_CASE("unbounded program") {
    // x1 - x2 = 0, maximize x1: the ray (t, t) is feasible.
    auto lp = explicit_lp(Sense::maximize, {{Relation::eq, 0}}, {1, 0}, {{1}, {-1}});
    CHECK(solve(lp).status == Status::unbounded);
}

TEST_CASE("negative right-hand sides") {
    // -x1 - x2 = -1 and -x1 <= -0.25, minimize x1 + 3 x2 -> x1 = 1.
    auto lp = explicit_lp(Sense::minimize, {{Relation::eq, -1}, {Relation::le, -0.25}}, {1, 3},
                          {{-1, -1}, {-1, 0}});
    auto s = solve(lp);
    REQUIRE(s.status == Status::optimal);
    CHECK(s.objective == doctest::Approx(1.0));
    // x1 <= -0.5 has no non-negative solution.
    auto bad = explicit_lp(Sense::minimize, {{Relation::eq, 1}, {Relation::le, -0.5}}, {1, 1},
                           {{1, 1}, {1, 0}});
    CHECK(solve(bad).status == Status::infeasible);
}

TEST_CASE("ten columns three equality rows against enumeration") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.1, 1), c(-1, 1);
    std::vector<std::vector<double>> cols(10, std::vector<double>(3));
    std::vector<double> cost(10);
    for (int j = 0; j < 10; ++j) {
        cost[j] = c(gen);
        for (int i = 0; i < 3; ++i) cols[j][i] = u(gen);
    }
    // rhs from the uniform mixture, so the program is feasible
    std::vector<Row> rows;
    for (int i = 0; i < 3; ++i) {
        double s = 0;
        for (int j = 0; j < 10; ++j) s += cols[j][i] / 10;
        rows.push_back({Relation::eq, s});
    }
    auto lp = explicit_lp(Sense::minimize, rows, cost, cols);
    auto s = solve(lp);
    auto o = oracle::enumerate(lp);
    REQUIRE(o.feasible);
    REQUIRE(s.status == Status::optimal);
    CHECK(std::abs(s.objective - o.objective) <= 1e-9);
}

TEST_CASE("random instances match enumeration") {
    std::mt19937_64 gen(2024);
    int feasible = 0;
    for (int t = 0; t < 300; ++t) {
        auto d = testlp::random_dense(gen);
        auto lp = d.program();
        auto s = solve(lp);
        auto o = oracle::enumerate(lp);
        CAPTURE(t);
        if (!o.feasible) {
            CHECK(s.status == Status::infeasible);
            continue;
        }
        ++feasible;
        REQUIRE(s.status == Status::optimal);
        CHECK(std::abs(s.objective - o.objective) <= 1e-9);
    }
    CHECK(feasible >= 100);
}

TEST_CASE("objective invariant under column permutation and duplication") {
    std::mt19937_64 gen(99);
    for (int t = 0; t < 100; ++t) {
        auto d = testlp::random_dense(gen);
        auto base = solve(d.program());
        if (base.status != Status::optimal) continue;

        auto perm = d;
        std::vector<std::size_t> idx(d.cost.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), gen);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            perm.cost[i] = d.cost[idx[i]];
            perm.cols[i] = d.cols[idx[i]];
        }
        auto sp = solve(perm.program());
        REQUIRE(sp.status == Status::optimal);
        CHECK(std::abs(sp.objective - base.objective) <= 1e-9);

        auto dup = d;
        for (std::size_t j = 0; j < d.cost.size(); ++j) {
            dup.cost.push_back(d.cost[j]);
            dup.cols.push_back(d.cols[j]);
        }
        auto sd = solve(dup.program());
        REQUIRE(sd.status == Status::optimal);
        CHECK(std::abs(sd.objective - base.objective) <= 1e-9);
    }
}

TEST_CASE("duals certify the optimum") {
    std::mt19937_64 gen(5);
    int checked = 0;
    for (int t = 0; t < 200; ++t) {
        auto d = testlp::random_dense(gen);
        auto s = solve(d.program());
        if (s.status != Status::optimal) continue;
        ++checked;
        const double sign = d.sense == Sense::minimize ? 1.0 : -1.0;
        double dual_obj = 0;
        for (std::size_t i = 0; i < d.rows.size(); ++i) {
            dual_obj += s.dual_values[i] * d.rows[i].rhs;
            // le rows carry duals of the sign that makes relaxing them harmless
            if (d.rows[i].relation == Relation::le) CHECK(sign * s.dual_values[i] <= 1e-9);
        }
        // weak duality, tight at the optimum
        CHECK(sign * (s.objective - dual_obj) >= -1e-9);
        CHECK(std::abs(s.objective - dual_obj) <= 1e-9);
        // dual feasibility: every reduced cost has the optimal sign
        for (std::size_t j = 0; j < d.cost.size(); ++j) {
            double rc = d.cost[j];
            for (std::size_t i = 0; i < d.rows.size(); ++i) rc -= s.dual_values[i] * d.cols[j][i];
            CHECK(sign * rc >= -1e-9);
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("iteration limit is reported as its own status") {
    std::mt19937_64 gen(1);
    auto d = testlp::random_dense(gen, 8, 4);
    while (true) {
        auto s = solve(d.program());
        if (s.status == Status::optimal && s.iterations > 1) break;
        d = testlp::random_dense(gen, 8, 4);
    }
    SolveOptions opts;
    opts.max_iter = 1;
    CHECK(solve(d.program(), opts).status == Status::iteration_limit);
}

TEST_CASE("malformed programs are rejected") {
    LinearProgram lp{Sense::minimize, {{Relation::eq, 1}}, nullptr};
    CHECK_THROWS_AS(solve(lp), std::invalid_argument);
    auto src = std::make_shared<ExplicitColumns>(2);
    src->add(1, std::vector<double>{1, 1});
    LinearProgram mismatch{Sense::minimize, {{Relation::eq, 1}}, src};
    CHECK_THROWS_AS(solve(mismatch), std::invalid_argument);
}

TEST_CASE("highly degenerate program terminates") {
    // Many identical columns and a redundant row produce long runs of
    // degenerate pivots.
    std::vector<std::vector<double>> cols;
    std::vector<double> cost;
    for (int j = 0; j < 40; ++j) {
        cols.push_back({1, 1, double(j % 2)});
        cost.push_back(-double(j % 3));
    }
    auto lp = explicit_lp(Sense::minimize, {{Relation::eq, 1}, {Relation::eq, 1}, {Relation::le, 0}},
                          cost, cols);
    auto s = solve(lp);
    REQUIRE(s.status == Status::optimal);
    CHECK(s.objective == doctest::Approx(-2.0));
}
