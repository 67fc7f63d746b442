#pragma once

#include <array>

#include "lipdual/core.hpp"

namespace lipdual {

/// Box grid for brute-force enumeration: [-bound, bound]^K with uniform step.
struct GridSpec {
    double bound;
    double step;
};

struct OracleSolution {
    double C = infinite_cost;  // infinite sentinel when no grid point is feasible
    Eigen::VectorXd f;
};

namespace detail {

inline double operator_norm(const Eigen::MatrixXd& m) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()[0];
}

} // namespace detail

/// Independent ground truth by grid enumeration, tractable for K <= 3. For
/// each grid point the inner scale variable is eliminated exactly: with
/// delta = 0 the point must satisfy the error bound (with one grid step of
/// operator-norm slack at the boundary) and costs c(f); with delta > 0 the
/// optimal scale is max(c(f)^{1/p}, (||x - phi f|| - eps) / delta).
inline OracleSolution brute_force_solve(const ProblemInstance& inst, const GridSpec& grid) {
    const Eigen::Index K = inst.code_dim();
    detail::require(K <= 3, "brute_force_solve: K must be <= 3");
    detail::require(grid.bound > 0.0 && grid.step > 0.0, "brute_force_solve: bound and step must be positive");
    detail::require(grid.bound / grid.step <= 1e4, "brute_force_solve: grid too fine (bound/step > 1e4)");

    const double p = inst.cost->order();
    const double slack = grid.step * detail::operator_norm(inst.phi.matrix());
    const long per_axis = 2 * static_cast<long>(std::floor(grid.bound / grid.step)) + 1;

    OracleSolution best;
    best.f = Eigen::VectorXd::Zero(K);

    Eigen::VectorXd f(K);
    const auto evaluate_point = [&](const Eigen::VectorXd& point) {
        const double c = inst.cost->evaluate(point);
        if (is_infinite(c)) return;
        const double resid = (inst.x - inst.phi.apply(point)).norm();
        double value;
        if (inst.delta == 0.0) {
            if (resid > inst.epsilon + slack) return;
            value = c;
        } else {
            const double scale = std::max(std::pow(c, 1.0 / p), (resid - inst.epsilon) / inst.delta);
            value = std::pow(std::max(scale, 0.0), p);
        }
        if (value < best.C) {
            best.C = value;
            best.f = point;
        }
    };

    std::array<long, 3> idx{0, 0, 0};
    const long total = [&] {
        long t = 1;
        for (Eigen::Index d = 0; d < K; ++d) t *= per_axis;
        return t;
    }();
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        for (Eigen::Index d = 0; d < K; ++d) {
            idx[static_cast<std::size_t>(d)] = rem % per_axis;
            rem /= per_axis;
        }
        for (Eigen::Index d = 0; d < K; ++d)
            f[d] = -grid.bound + grid.step * static_cast<double>(idx[static_cast<std::size_t>(d)]);
        evaluate_point(f);
    }
    evaluate_point(Eigen::VectorXd::Zero(K));  // the origin need not align with the grid
    return best;
}

/// Brute-force gauge: the inverse problem with zero error threshold, raised
/// to 1/p.
inline double oracle_gauge(const Eigen::VectorXd& z, const LinearOperator& phi, double delta,
                           const CostPtr& cost, const GridSpec& grid) {
    const ProblemInstance lifted(z, LinearOperator(phi.matrix()), 0.0, delta, cost);
    const OracleSolution sol = brute_force_solve(lifted, grid);
    if (is_infinite(sol.C)) return infinite_cost;
    return std::pow(sol.C, 1.0 / cost->order());
}

/// Rough Lipschitz bound for the eliminated objective over the grid box,
/// used to budget the grid-resolution error allowance. With delta = 0 the
/// boundary slack lets the oracle drift along near-feasible directions, so
/// the allowance carries the conditioning of phi.
inline double oracle_lipschitz(const ProblemInstance& inst) {
    const double cost_lip = std::sqrt(static_cast<double>(inst.code_dim()));
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(inst.phi.matrix()).singularValues();
    const double op = sv[0];
    if (inst.delta > 0.0) return std::max(cost_lip, op / inst.delta);
    double smallest_positive = op;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-10 * op) smallest_positive = sv[i];
    return cost_lip * std::max(1.0, op / smallest_positive);
}

} // namespace lipdual
