#include <catch2/catch_amalgamated.hpp>

#include "lipdual/lipdual.hpp"
#include "lipdual/suite.hpp"

using namespace lipdual;
using Catch::Approx;

namespace {

Eigen::Vector2d v2(double a, double b) { return Eigen::Vector2d(a, b); }

Dataset single_sample(const Eigen::VectorXd& x, double eps = 0.0) {
    Dataset data;
    data.samples = x;
    data.epsilons = Eigen::VectorXd::Constant(1, eps);
    return data;
}

} // namespace

TEST_CASE("project_dictionary rescales only overlong columns", "[dictlearn]") {
    Eigen::MatrixXd m(2, 3);
    m.col(0) = v2(3, 4);
    m.col(1) = v2(0.1, 0.2);
    m.col(2) = v2(0, 0);
    const Dictionary dict = project_dictionary(m);
    CHECK(dict.columns.col(0).isApprox(v2(0.6, 0.8)));
    CHECK(dict.columns.col(1).isApprox(v2(0.1, 0.2)));
    CHECK(dict.columns.col(2).norm() == 0.0);
}

TEST_CASE("encode_all basics", "[dictlearn]") {
    LearnConfig cfg;
    SECTION("identity dictionary encodes a basis vector at unit cost") {
        Dictionary dict{Eigen::MatrixXd::Identity(2, 2)};
        const auto enc = encode_all(dict, single_sample(v2(1, 0)), 0.0, cfg);
        CHECK(enc.costs[0] == Approx(1.0).margin(1e-6));
        CHECK(enc.atoms.col(0).isApprox(v2(1, 0), 1e-6));
        CHECK_FALSE(enc.flagged(0));
    }
    SECTION("samples inside their own ball cost nothing") {
        Dictionary dict{Eigen::MatrixXd::Identity(2, 2)};
        const auto enc = encode_all(dict, single_sample(v2(0.1, 0), 0.5), 0.0, cfg);
        CHECK(enc.costs[0] == 0.0);
        CHECK(enc.atoms.col(0).norm() == 0.0);
        CHECK(enc.duals.col(0).norm() == 0.0);
    }
    SECTION("one-sparse data under its generating dictionary") {
        Rng rng(51);
        Eigen::MatrixXd d0 = rng.normal_matrix(4, 3);
        d0 = d0.householderQr().householderQ() * Eigen::MatrixXd::Identity(4, 3);  // orthonormal atoms
        Dataset data;
        data.samples.resize(4, 6);
        Eigen::VectorXd coefs(6);
        for (int t = 0; t < 6; ++t) {
            coefs[t] = rng.uniform(0.5, 2.0);
            data.samples.col(t) = coefs[t] * d0.col(t % 3);
        }
        data.epsilons = Eigen::VectorXd::Zero(6);
        const auto enc = encode_all(Dictionary{d0}, data, 0.0, cfg);
        for (int t = 0; t < 6; ++t) CHECK(enc.costs[t] == Approx(coefs[t]).margin(1e-4));
    }
}

TEST_CASE("update_dictionary fixed points", "[dictlearn]") {
    LearnConfig cfg;
    SECTION("an already optimal column stays put") {
        LearnState state;
        state.dictionary = Dictionary{Eigen::MatrixXd::Identity(2, 2)};
        state.atoms = v2(1, 0);
        state.duals = v2(1, 0);
        const Dataset data = single_sample(v2(1, 0));
        const Dictionary updated = update_dictionary(state, data, 0.1, cfg);
        CHECK((updated.columns.col(0) - v2(1, 0)).norm() <= 1e-9);
        // cost under the updated dictionary did not get worse
        const double before = encode_all(state.dictionary, data, 0.1, cfg).average_cost();
        const double after = encode_all(updated, data, 0.1, cfg).average_cost();
        CHECK(after <= before + 1e-9);
    }
    SECTION("zero atoms leave the dictionary unchanged") {
        LearnState state;
        state.dictionary = Dictionary{Eigen::MatrixXd::Identity(2, 2)};
        state.atoms = Eigen::MatrixXd::Zero(2, 1);
        state.duals = Eigen::MatrixXd::Zero(2, 1);
        const Dictionary updated = update_dictionary(state, single_sample(v2(1, 0)), 0.1, cfg);
        CHECK(updated.columns.isApprox(Eigen::MatrixXd::Identity(2, 2)));
    }
    SECTION("a two-sample update never raises the re-encoded cost") {
        Rng rng(52);
        Dataset data;
        data.samples.resize(2, 2);
        data.samples.col(0) = v2(1, 0);
        data.samples.col(1) = v2(0, 1);
        data.epsilons = Eigen::VectorXd::Zero(2);
        LearnState state;
        state.dictionary = project_dictionary(rng.normal_matrix(2, 2));
        const auto enc = encode_all(state.dictionary, data, 0.1, cfg);
        state.atoms = enc.atoms;
        state.duals = enc.duals;
        const Dictionary updated = update_dictionary(state, data, 0.1, cfg);
        const double after = encode_all(updated, data, 0.1, cfg).average_cost();
        CHECK(after <= enc.average_cost() + 1e-8);
    }
}

TEST_CASE("learn rejects an empty dataset", "[dictlearn]") {
    Dataset data;
    data.samples.resize(2, 0);
    data.epsilons.resize(0);
    CHECK_THROWS_AS(learn(data, 2, 0.1, {}), std::invalid_argument);
}

TEST_CASE("learn with one atom and colinear samples recovers the direction", "[dictlearn]") {
    Rng rng(53);
    Eigen::VectorXd v = rng.normal_vector(3).normalized();
    Dataset data;
    data.samples.resize(3, 12);
    for (int t = 0; t < 12; ++t) data.samples.col(t) = rng.uniform(0.4, 1.6) * (t % 2 ? v : -v);
    data.epsilons = Eigen::VectorXd::Zero(12);
    LearnConfig cfg;
    cfg.seed = 2;
    const auto res = learn(data, 1, 0.1, cfg);
    CHECK(std::abs(res.dictionary.columns.col(0).dot(v)) >= 1.0 - 1e-2);
}

TEST_CASE("learning on one-sparse data reaches the generating dictionary's cost", "[dictlearn][slow]") {
    Rng rng(54);
    Eigen::MatrixXd d0 = rng.normal_matrix(4, 3);
    for (int k = 0; k < 3; ++k) d0.col(k).normalize();
    Dataset data;
    data.samples.resize(4, 40);
    for (int t = 0; t < 40; ++t)
        data.samples.col(t) = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5) * d0.col(t % 3);
    data.epsilons = Eigen::VectorXd::Zero(40);

    LearnConfig cfg;
    cfg.seed = 3;
    const auto reference = encode_all(Dictionary{d0}, data, 0.1, cfg).average_cost();
    const auto res = learn(data, 3, 0.1, cfg);
    CHECK(res.cost_trace.back() <= reference + 1e-2);
}

TEST_CASE("cost trace is monotone and dictionaries stay feasible", "[dictlearn][slow]") {
    for (unsigned seed : {1u, 4u}) {
        const DictionaryCase dc = make_dictionary_case(seed, 6, 8, 40);
        LearnConfig cfg;
        cfg.seed = seed;
        cfg.outer_iters = 8;
        const auto res = learn(dc.data, 8, 0.1, cfg);
        for (std::size_t i = 1; i < res.cost_trace.size(); ++i)
            CHECK(res.cost_trace[i] <= res.cost_trace[i - 1] + 10.0 * cfg.inner.tol);
        for (Eigen::Index k = 0; k < res.dictionary.atom_count(); ++k)
            CHECK(res.dictionary.columns.col(k).norm() <= 1.0 + 1e-12);
        CHECK(res.flagged_samples.empty());
    }
}

TEST_CASE("positive delta keeps every sample encodable regardless of the dictionary", "[dictlearn]") {
    Rng rng(55);
    const DictionaryCase dc = make_dictionary_case(2, 5, 6, 15);
    LearnConfig cfg;
    // adversarial dictionary: all columns nearly parallel
    Eigen::MatrixXd bad(5, 6);
    const Eigen::VectorXd base = rng.normal_vector(5).normalized();
    for (int k = 0; k < 6; ++k) bad.col(k) = (base + 0.01 * rng.normal_vector(5)).normalized();
    const auto enc = encode_all(Dictionary{bad}, dc.data, 0.5, cfg);
    for (Eigen::Index t = 0; t < dc.data.size(); ++t) {
        CHECK(enc.statuses[static_cast<std::size_t>(t)] != SolveStatus::infeasible);
        CHECK(std::isfinite(enc.costs[t]));
    }
}

TEST_CASE("samples inside their ball contribute exactly zero to the trace", "[dictlearn]") {
    Rng rng(56);
    Dataset data;
    data.samples.resize(3, 4);
    for (int t = 0; t < 4; ++t) data.samples.col(t) = rng.normal_vector(3);
    data.epsilons = Eigen::VectorXd::Zero(4);
    data.epsilons[1] = data.samples.col(1).norm() * 2.0;  // swallowed by its own ball
    LearnConfig cfg;
    cfg.outer_iters = 2;
    const auto enc = encode_all(project_dictionary(rng.normal_matrix(3, 4)), data, 0.1, cfg);
    CHECK(enc.costs[1] == 0.0);
    const double avg_without = (enc.costs.sum() - enc.costs[1]) / 4.0;
    CHECK(enc.average_cost() == Approx(avg_without));
}

TEST_CASE("dataset validation", "[dictlearn]") {
    Dataset bad;
    bad.samples.resize(2, 2);
    bad.samples.setZero();
    bad.epsilons = Eigen::VectorXd::Constant(2, -0.1);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.epsilons = Eigen::VectorXd::Zero(1);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
