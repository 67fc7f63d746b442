#pragma once

#include "lipdual/dictlearn.hpp"
#include "lipdual/oracle.hpp"

namespace lipdual {

/// Deterministic desk-scale problem family indexed by a single seed. Covers
/// K in {1,2,3}, n in {2,3,4}, eps in {0, 0.3}, delta in {0, 0.5} and all
/// three cost kinds; every instance keeps its optimum inside the oracle box.
struct SuiteInstance {
    std::string id;
    ProblemInstance inst;
    GridSpec grid;
};

inline GridSpec suite_grid(Eigen::Index K) {
    if (K == 1) return {3.0, 1e-3};
    if (K == 2) return {3.0, 5e-3};
    return {3.0, 5e-2};
}

inline SuiteInstance make_suite_instance(unsigned seed) {
    const Eigen::Index K = 1 + static_cast<Eigen::Index>(seed % 3);
    const Eigen::Index n = 2 + static_cast<Eigen::Index>((seed / 3) % 3);
    const double eps = ((seed / 9) % 2) ? 0.3 : 0.0;
    const double delta = ((seed / 18) % 2) ? 0.5 : 0.0;
    const CostKind kind = static_cast<CostKind>((seed / 4) % 3);

    Rng rng(1000 + seed);
    Eigen::MatrixXd m = rng.normal_matrix(n, K);
    for (Eigen::Index k = 0; k < K; ++k) m.col(k).normalize();
    LinearOperator phi(m);

    Eigen::VectorXd f0(K);
    for (Eigen::Index i = 0; i < K; ++i)
        f0[i] = kind == CostKind::l1_nonneg ? rng.uniform(0.1, 1.0) : rng.uniform(-1.0, 1.0);
    const CostPtr cost = make_cost(kind, K);
    const double c0 = cost->evaluate(f0);
    if (c0 > 0.0) f0 *= rng.uniform(0.5, 1.5) / c0;

    Eigen::VectorXd x = phi.apply(f0);
    if (delta > 0.0) {
        x += 0.2 * rng.normal_vector(n).normalized();
    } else if (eps > 0.0) {
        const ImageProjection proj(phi);
        if (proj.rank() < n)  // park the ball strictly inside reach of the image
            x += 0.15 * (proj.complement() * rng.normal_vector(n - proj.rank())).normalized();
        x += 0.1 * (proj.basis() * rng.normal_vector(proj.rank())).normalized();
    }
    if (eps > 0.0 && seed % 17 == 0) x *= 0.5 * eps / std::max(x.norm(), 1e-9);  // zero-cost case

    SuiteInstance out{
        "suite-" + std::to_string(seed) + "-" + to_string(kind) + "-n" + std::to_string(n) + "-K" +
            std::to_string(K) + "-e" + (eps > 0 ? std::string("0.3") : std::string("0")) + "-d" +
            (delta > 0 ? std::string("0.5") : std::string("0")),
        ProblemInstance(x, std::move(phi), eps, delta, cost), suite_grid(K)};
    return out;
}

/// Instance whose error ball is exactly tangent to image(phi): delta = 0,
/// K = 1 < n, and x displaced off the image by precisely eps. The companion
/// reduced instance projects x back onto the image (same optimal cost).
struct TangentCase {
    ProblemInstance inst;
    ProblemInstance reduced;
    GridSpec grid;
};

inline TangentCase make_tangent_case(unsigned seed) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(seed % 2);
    const double eps = 0.3;
    Rng rng(7000 + seed);
    Eigen::MatrixXd m = rng.normal_matrix(n, 1);
    m.col(0).normalize();
    LinearOperator phi(m);
    const ImageProjection proj(phi);

    const GridSpec grid{0.5, 5e-5};
    // place the optimal coefficient exactly on the oracle lattice
    const long lattice = 12000 + 10 * static_cast<long>(seed % 50);
    const double t = -grid.bound + grid.step * static_cast<double>(lattice);

    const Eigen::VectorXd u = proj.complement() * rng.normal_vector(n - 1).normalized();
    const Eigen::VectorXd y0 = t * m.col(0);
    const CostPtr cost = make_cost(CostKind::l1, 1);
    return TangentCase{ProblemInstance(y0 + eps * u, LinearOperator(m), eps, 0.0, cost),
                       ProblemInstance(y0, LinearOperator(m), 0.0, 0.0, cost), grid};
}

/// Noiseless sparse-recovery case: Gaussian 30 x 60 measurement map, 3-sparse
/// code with unit-magnitude entries, exact measurements.
struct SparseRecoveryCase {
    ProblemInstance inst;
    Eigen::VectorXd f_true;
};

inline SparseRecoveryCase make_sparse_recovery_case(unsigned seed, Eigen::Index n = 30,
                                                    Eigen::Index K = 60, int sparsity = 3) {
    Rng rng(40000 + seed);
    Eigen::MatrixXd m = rng.normal_matrix(n, K) / std::sqrt(static_cast<double>(n));
    Eigen::VectorXd f = Eigen::VectorXd::Zero(K);
    int placed = 0;
    while (placed < sparsity) {
        const Eigen::Index i = rng.uniform_int(0, static_cast<int>(K) - 1);
        if (f[i] != 0.0) continue;
        f[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
        ++placed;
    }
    LinearOperator phi(m);
    Eigen::VectorXd x = phi.apply(f);
    return SparseRecoveryCase{ProblemInstance(std::move(x), std::move(phi), 0.0, 0.0, make_cost(CostKind::l1, K)),
                              std::move(f)};
}

/// Synthetic dictionary-learning corpus: samples are s-sparse combinations of
/// a unit-column generating dictionary.
struct DictionaryCase {
    Dataset data;
    Dictionary generator;
};

inline DictionaryCase make_dictionary_case(unsigned seed, Eigen::Index n = 8, Eigen::Index K = 12,
                                           Eigen::Index T = 200, int sparsity = 2) {
    Rng rng(90000 + seed);
    Eigen::MatrixXd d0 = rng.normal_matrix(n, K);
    for (Eigen::Index k = 0; k < K; ++k) d0.col(k).normalize();

    Eigen::MatrixXd samples(n, T);
    for (Eigen::Index t = 0; t < T; ++t) {
        Eigen::VectorXd code = Eigen::VectorXd::Zero(K);
        int placed = 0;
        while (placed < sparsity) {
            const Eigen::Index i = rng.uniform_int(0, static_cast<int>(K) - 1);
            if (code[i] != 0.0) continue;
            code[i] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
            ++placed;
        }
        samples.col(t) = d0 * code;
    }
    return DictionaryCase{Dataset{std::move(samples), Eigen::VectorXd::Zero(T)}, Dictionary{std::move(d0)}};
}

} // namespace lipdual
