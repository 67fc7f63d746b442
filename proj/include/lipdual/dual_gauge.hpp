#pragma once

#include "lipdual/core.hpp"

namespace lipdual {

/// Dual gauge of the inflated atomic set: closed form
///   ||lambda||' = delta ||lambda|| + max_{h in V} <lambda, phi(h)>,
/// where the maximum is the cost's support oracle at phi^T lambda.
inline double dual_gauge(const Eigen::VectorXd& lambda, const LinearOperator& phi, double delta,
                         const CostModel& cost) {
    detail::require(delta >= 0.0, "delta must be >= 0");
    detail::require(lambda.size() == phi.output_dim(), "dual_gauge: dimension mismatch");
    return delta * lambda.norm() + cost.support(phi.adjoint_apply(lambda));
}

inline double dual_gauge(const Eigen::VectorXd& lambda, const ProblemInstance& inst) {
    return dual_gauge(lambda, inst.phi, inst.delta, *inst.cost);
}

/// Minimum of <lambda, .> over the ball B[x, epsilon]; the dual objective.
inline double margin(const Eigen::VectorXd& lambda, const Eigen::VectorXd& x, double epsilon) {
    return lambda.dot(x) - epsilon * lambda.norm();
}

inline double margin(const Eigen::VectorXd& lambda, const ProblemInstance& inst) {
    return margin(lambda, inst.x, inst.epsilon);
}

} // namespace lipdual
