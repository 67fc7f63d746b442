#include <catch2/catch_amalgamated.hpp>

#include "lipdual/gauge.hpp"
#include "lipdual/lipdual.hpp"
#include "lipdual/oracle.hpp"

using namespace lipdual;
using Catch::Approx;

namespace {
Eigen::Vector2d v2(double a, double b) { return Eigen::Vector2d(a, b); }
const Eigen::MatrixXd kId2 = Eigen::MatrixXd::Identity(2, 2);
}

TEST_CASE("dual gauge closed form", "[gauge]") {
    auto l1 = make_cost(CostKind::l1, 2);
    LinearOperator id(kId2);
    CHECK(dual_gauge(v2(3, -1), id, 0.0, *l1) == Approx(3.0));
    CHECK(dual_gauge(v2(3, 4), id, 0.5, *l1) == Approx(6.5));
    CHECK(dual_gauge(v2(0, 0), id, 0.5, *l1) == 0.0);
}

TEST_CASE("dual gauge equals the sup-norm form exactly for l1 with delta 0", "[gauge]") {
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::MatrixXd m = rng.normal_matrix(3, 4);
        LinearOperator phi(m);
        auto cost = make_cost(CostKind::l1, 4);
        const Eigen::VectorXd lambda = rng.normal_vector(3);
        const double closed_form = (m.transpose() * lambda).cwiseAbs().maxCoeff();
        CHECK(dual_gauge(lambda, phi, 0.0, *cost) == closed_form);  // bitwise: same reduction
    }
}

TEST_CASE("dual gauge is sublinear and positive for delta > 0", "[gauge]") {
    Rng rng(13);
    LinearOperator phi(rng.normal_matrix(3, 2));
    auto cost = make_cost(CostKind::l2, 2);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd a = rng.normal_vector(3);
        const Eigen::VectorXd b = rng.normal_vector(3);
        CHECK(dual_gauge(a + b, phi, 0.5, *cost) <=
              dual_gauge(a, phi, 0.5, *cost) + dual_gauge(b, phi, 0.5, *cost) + 1e-10);
        CHECK(dual_gauge(a, phi, 0.5, *cost) > 0.0);
    }
}

TEST_CASE("gauge of the l1 atomic set is the l1 norm", "[gauge]") {
    auto gp = gauge(v2(1, 1), LinearOperator(kId2), 0.0, make_cost(CostKind::l1, 2));
    CHECK(gp.value == Approx(2.0).margin(1e-8));
    REQUIRE(gp.attained_atom.has_value());
    CHECK((v2(1, 1) - gp.value * gp.attained_atom.value()).norm() <= 1e-8);
}

TEST_CASE("gauge at zero is zero", "[gauge]") {
    auto gp = gauge(v2(0, 0), LinearOperator(kId2), 0.0, make_cost(CostKind::l1, 2));
    CHECK(gp.value == 0.0);
    REQUIRE(gp.attained_atom.has_value());
    CHECK(gp.attained_atom->norm() == 0.0);
}

TEST_CASE("gauge with inflation delta", "[gauge]") {
    // reach (2,0) from the unit l1 atom ball inflated by delta = 1
    auto cost = make_cost(CostKind::l1, 2);
    auto gp = gauge(v2(2, 0), LinearOperator(kId2), 1.0, cost);
    CHECK(gp.value == Approx(1.0).margin(1e-6));
    // independent enumeration agrees
    const double oracle = oracle_gauge(v2(2, 0), LinearOperator(kId2), 1.0, cost, {3.0, 1e-3});
    CHECK(gp.value == Approx(oracle).margin(5e-3));
    // membership certificate of the attained atom
    REQUIRE(gp.attained_atom.has_value());
    CHECK((v2(2, 0) - gp.value * gp.attained_atom.value()).norm() <= gp.value * 1.0 + 1e-8);
}

TEST_CASE("gauge is infinite off the image when delta is zero", "[gauge]") {
    Eigen::MatrixXd col(2, 1);
    col << 1, 0;
    auto gp = gauge(v2(0.5, 1.0), LinearOperator(col), 0.0, make_cost(CostKind::l1, 1));
    CHECK(is_infinite(gp.value));
    CHECK_FALSE(gp.attained_atom.has_value());
}

TEST_CASE("holder gap examples", "[gauge]") {
    auto l1 = make_cost(CostKind::l1, 2);
    LinearOperator id(kId2);
    CHECK(holder_gap(v2(0, 0), v2(0.7, -0.4), id, 0.0, l1) == 0.0);
    CHECK(holder_gap(v2(1, 0), v2(1, 0), id, 0.0, l1) == Approx(0.0).margin(1e-8));
    CHECK(holder_gap(v2(1, 0), v2(1, 1), id, 0.0, l1) == Approx(1.0).margin(1e-6));
}

TEST_CASE("holder gap requires finite gauge", "[gauge]") {
    Eigen::MatrixXd col(2, 1);
    col << 1, 0;
    CHECK_THROWS_AS(holder_gap(v2(1, 1), v2(0.5, 1.0), LinearOperator(col), 0.0, make_cost(CostKind::l1, 1)),
                    std::invalid_argument);
}

TEST_CASE("holder inequality over random pairs", "[gauge][slow]") {
    Rng rng(14);
    int checked = 0;
    for (CostKind kind : {CostKind::l1, CostKind::l2, CostKind::l1_nonneg}) {
        for (double delta : {0.0, 0.5}) {
            for (int trial = 0; trial < 34; ++trial) {
                const Eigen::Index n = 2, k = 2;
                Eigen::MatrixXd m = rng.normal_matrix(n, k);
                LinearOperator phi(m);
                auto cost = make_cost(kind, k);
                Eigen::VectorXd f = rng.normal_vector(k);
                if (kind == CostKind::l1_nonneg) f = f.cwiseAbs();
                const Eigen::VectorXd y = phi.apply(f);
                const Eigen::VectorXd lambda = rng.normal_vector(n);
                CHECK(holder_gap(lambda, y, phi, delta, cost) >= -1e-8);
                ++checked;
            }
        }
    }
    CHECK(checked >= 200);
}

TEST_CASE("sampled dual maximization recovers the gauge", "[gauge][slow]") {
    Rng rng(15);
    auto cost = make_cost(CostKind::l1, 2);
    LinearOperator phi(rng.normal_matrix(2, 2));
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd y = phi.apply(rng.normal_vector(2));
        const double g = gauge(y, phi, trial % 2 ? 0.5 : 0.0, cost).value;
        REQUIRE(!is_infinite(g));
        double sampled = 0.0;
        for (int probe = 0; probe < 500; ++probe) {
            Eigen::VectorXd lambda = rng.normal_vector(2);
            const double dg = dual_gauge(lambda, phi, trial % 2 ? 0.5 : 0.0, *cost);
            if (dg <= 1e-12) continue;
            sampled = std::max(sampled, lambda.dot(y) / dg);
        }
        CHECK(sampled <= g + 1e-8);
        CHECK(sampled >= 0.98 * g);
    }
}

TEST_CASE("gauge scales linearly", "[gauge]") {
    Rng rng(16);
    auto cost = make_cost(CostKind::l2, 2);
    LinearOperator phi(rng.normal_matrix(3, 2));
    const Eigen::VectorXd z = phi.apply(rng.normal_vector(2));
    const double base = gauge(z, phi, 0.5, cost).value;
    for (double alpha : {0.5, 2.0, 10.0}) {
        const double scaled = gauge(alpha * z, phi, 0.5, cost).value;
        CHECK(std::abs(scaled - alpha * base) <= 1e-6 * std::max(1.0, alpha * base));
    }
}

TEST_CASE("gauge surfaces the solver budget as an explicit error", "[gauge]") {
    Rng rng(17);
    LinearOperator phi(rng.normal_matrix(3, 3));
    const Eigen::VectorXd z = phi.apply(rng.normal_vector(3));
    bool thrown = false;
    try {
        // unreachable tolerance forces the budget path
        gauge(z, phi, 0.5, make_cost(CostKind::l2, 3), 1e-18);
    } catch (const SolverBudgetError& e) {
        thrown = true;
        CHECK(e.lower() <= e.upper());
        CHECK(e.upper() - e.lower() < 1e-3);  // the bracket is still informative
    }
    CHECK(thrown);
}
