#include <catch2/catch_amalgamated.hpp>

#include "lipdual/lipdual.hpp"

using namespace lipdual;
using Catch::Approx;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> vals) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}

Eigen::VectorXd random_point(Rng& rng, CostKind kind, Eigen::Index dim) {
    Eigen::VectorXd f = rng.normal_vector(dim);
    if (kind == CostKind::l1_nonneg) f = f.cwiseAbs();
    return f;
}

} // namespace

TEST_CASE("evaluate", "[costs]") {
    CHECK(make_cost(CostKind::l1, 3)->evaluate(vec({1, -2, 0.5})) == Approx(3.5));
    CHECK(make_cost(CostKind::l2, 2)->evaluate(vec({3, 4})) == Approx(5.0));
    auto nn = make_cost(CostKind::l1_nonneg, 2);
    CHECK(nn->evaluate(vec({0.2, 0.3})) == Approx(0.5));
    CHECK(is_infinite(nn->evaluate(vec({-0.1, 0.3}))));
}

TEST_CASE("support", "[costs]") {
    CHECK(make_cost(CostKind::l1, 2)->support(vec({3, -5})) == Approx(5.0));
    CHECK(make_cost(CostKind::l2, 2)->support(vec({3, 4})) == Approx(5.0));
    CHECK(make_cost(CostKind::l1_nonneg, 2)->support(vec({-2, -1})) == 0.0);
}

TEST_CASE("lmo", "[costs]") {
    CHECK(make_cost(CostKind::l1, 2)->lmo(vec({3, -5})).isApprox(vec({0, -1})));
    CHECK(make_cost(CostKind::l2, 2)->lmo(vec({3, 4})).isApprox(vec({0.6, 0.8})));
    // ties resolve to the lowest index
    CHECK(make_cost(CostKind::l1, 2)->lmo(vec({2, 2})).isApprox(vec({1, 0})));
    CHECK(make_cost(CostKind::l1_nonneg, 2)->lmo(vec({-2, -1})).norm() == 0.0);
    CHECK(make_cost(CostKind::l2, 2)->lmo(vec({0, 0})).norm() == 0.0);
}

TEST_CASE("oracles reject mismatched dimensions", "[costs]") {
    auto cost = make_cost(CostKind::l1, 3);
    CHECK_THROWS_AS(cost->evaluate(vec({1, 2})), std::invalid_argument);
    CHECK_THROWS_AS(cost->support(vec({1, 2})), std::invalid_argument);
    CHECK_THROWS_AS(cost->lmo(vec({1, 2})), std::invalid_argument);
}

TEST_CASE("positive homogeneity of order one", "[costs]") {
    Rng rng(5);
    for (CostKind kind : {CostKind::l1, CostKind::l2, CostKind::l1_nonneg}) {
        auto cost = make_cost(kind, 4);
        for (int trial = 0; trial < 100; ++trial) {
            const Eigen::VectorXd f = random_point(rng, kind, 4);
            const double alpha = rng.uniform(0.0, 4.0);
            const double lhs = cost->evaluate(alpha * f);
            const double rhs = alpha * cost->evaluate(f);
            CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)));
        }
    }
}

TEST_CASE("support and lmo are consistent", "[costs]") {
    Rng rng(6);
    for (CostKind kind : {CostKind::l1, CostKind::l2, CostKind::l1_nonneg}) {
        auto cost = make_cost(kind, 5);
        for (int trial = 0; trial < 100; ++trial) {
            const Eigen::VectorXd g = rng.normal_vector(5);
            const Eigen::VectorXd atom = cost->lmo(g);
            CHECK(cost->membership(atom));
            CHECK(std::abs(g.dot(atom) - cost->support(g)) <= 1e-10);
            CHECK(cost->support(g) >= 0.0);
        }
    }
}

TEST_CASE("support is sublinear", "[costs]") {
    Rng rng(8);
    for (CostKind kind : {CostKind::l1, CostKind::l2, CostKind::l1_nonneg}) {
        auto cost = make_cost(kind, 4);
        for (int trial = 0; trial < 50; ++trial) {
            const Eigen::VectorXd g1 = rng.normal_vector(4);
            const Eigen::VectorXd g2 = rng.normal_vector(4);
            CHECK(cost->support(g1 + g2) <= cost->support(g1) + cost->support(g2) + 1e-10);
        }
    }
}

TEST_CASE("membership is closed under convex combinations", "[costs]") {
    Rng rng(9);
    for (CostKind kind : {CostKind::l1, CostKind::l2, CostKind::l1_nonneg}) {
        auto cost = make_cost(kind, 3);
        int checked = 0;
        for (int trial = 0; trial < 100; ++trial) {
            Eigen::VectorXd f1 = random_point(rng, kind, 3);
            Eigen::VectorXd f2 = random_point(rng, kind, 3);
            const double c1 = cost->evaluate(f1);
            const double c2 = cost->evaluate(f2);
            if (c1 > 0) f1 *= rng.uniform() / c1;
            if (c2 > 0) f2 *= rng.uniform() / c2;
            REQUIRE(cost->membership(f1));
            REQUIRE(cost->membership(f2));
            for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                CHECK(cost->membership(t * f1 + (1.0 - t) * f2));
                ++checked;
            }
        }
        CHECK(checked == 500);
    }
}
