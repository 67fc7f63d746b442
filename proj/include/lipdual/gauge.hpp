#pragma once

#include "lipdual/minmax.hpp"

namespace lipdual {

/// Gauge evaluation result. A finite value r means z lies in the atomic set
/// scaled by r, reached through the attained atom.
struct GaugePair {
    double value = 0.0;
    std::optional<Eigen::VectorXd> attained_atom;
};

/// Gauge of the inflated atomic set, evaluated through the inverse problem
/// with zero error threshold: ||z||_phi = C_delta(phi, z, 0)^{1/p}. Infinite
/// sentinel when delta = 0 and z is off image(phi).
inline GaugePair gauge(const Eigen::VectorXd& z, const LinearOperator& phi, double delta,
                       const CostPtr& cost, double tol = 1e-6) {
    detail::require(cost != nullptr, "gauge: cost model is required");
    detail::require(z.size() == phi.output_dim(), "gauge: dimension mismatch");
    detail::require(delta >= 0.0, "gauge: delta must be >= 0");

    if (z.norm() == 0.0)
        return {0.0, Eigen::VectorXd::Zero(phi.input_dim())};

    if (delta == 0.0) {
        const ImageProjection proj(phi);
        if (proj.residual(z) > 1e-8 * (1.0 + z.norm())) return {infinite_cost, std::nullopt};
    }

    SolverConfig cfg;
    cfg.tol = tol;
    const ProblemInstance lifted(z, LinearOperator(phi.matrix()), 0.0, delta, cost);
    const SolveResult sol = solve(lifted, cfg);
    switch (sol.status) {
        case SolveStatus::converged:
        case SolveStatus::zero_solution:
            return {sol.primal.scale, sol.primal.h};
        case SolveStatus::infeasible:
            return {infinite_cost, std::nullopt};
        default:
            throw SolverBudgetError(sol.dual_lower, sol.primal_upper);
    }
}

inline GaugePair gauge(const Eigen::VectorXd& z, const ProblemInstance& like, double tol = 1e-6) {
    return gauge(z, like.phi, like.delta, like.cost, tol);
}

/// Slack in the Holder-type pairing: ||y||_phi ||lambda||' - <lambda, y>.
/// Nonnegative for every lambda and every y of finite gauge.
inline double holder_gap(const Eigen::VectorXd& lambda, const Eigen::VectorXd& y,
                         const LinearOperator& phi, double delta, const CostPtr& cost,
                         double tol = 1e-6) {
    if (lambda.norm() == 0.0) return 0.0;
    const GaugePair gp = gauge(y, phi, delta, cost, tol);
    detail::require(!is_infinite(gp.value), "holder_gap: y has infinite gauge");
    return gp.value * dual_gauge(lambda, phi, delta, *cost) - lambda.dot(y);
}

} // namespace lipdual
