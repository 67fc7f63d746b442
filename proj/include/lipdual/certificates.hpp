#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "lipdual/dual_gauge.hpp"

namespace lipdual {

namespace detail {

/// Smallest theta >= 0 with ||x - theta v|| <= eps + theta delta, or the
/// infinite sentinel when the moving ball never meets B[x, eps]. This is the
/// quadratic theta^2 (||v||^2 - delta^2) - 2 theta (<x,v> + eps delta)
/// + (||x||^2 - eps^2) <= 0 solved for its smallest nonnegative root; all
/// coefficient sign patterns are handled explicitly.
inline double smallest_intersection_scale(const Eigen::VectorXd& x, const Eigen::VectorXd& v,
                                          double eps, double delta) {
    const double a = v.squaredNorm() - delta * delta;
    const double b = x.dot(v) + eps * delta;
    const double c = x.squaredNorm() - eps * eps;
    if (c <= 0.0) return 0.0;  // ||x|| <= eps: theta = 0 already works

    if (a > 0.0) {
        double d = b * b - a * c;
        // rounding guard for rays that graze the ball (e.g. v exactly
        // colinear with x when eps = delta = 0)
        const double d_scale = b * b + std::abs(a * c);
        if (d < 0.0 && d >= -1e-12 * d_scale) d = 0.0;
        if (d < 0.0 || b <= 0.0) return infinite_cost;
        return c / (b + std::sqrt(d));  // stable form of (b - sqrt(d)) / a
    }
    if (a == 0.0) {
        if (b <= 0.0) return infinite_cost;
        return c / (2.0 * b);
    }
    // a < 0: the ball radius outgrows the center drift, so the discriminant
    // is positive and the smallest admissible root is c / (b + sqrt(d)).
    const double d = b * b - a * c;
    return c / (b + std::sqrt(d));
}

} // namespace detail

/// Exact primal upper bound for the atom h: the least scaling theta at which
/// the ball B[phi(theta h), theta delta] reaches B[x, eps]. Returns the
/// infinite sentinel when no scaling works (h points the wrong way).
inline double eta(const Eigen::VectorXd& h, const ProblemInstance& inst) {
    detail::require(h.size() == inst.code_dim(), "eta: dimension mismatch");
    detail::require(inst.cost->membership(h, 1e-6), "eta: h lies outside the unit cost ball");
    return detail::smallest_intersection_scale(inst.x, inst.phi.apply(h), inst.epsilon, inst.delta);
}

/// Unique point where B[x, eps] touches the optimally scaled atomic set.
/// For eps = 0 it is x itself; otherwise the convex combination
/// (eps phi(f) + delta C^{1/p} x) / (eps + delta C^{1/p}).
inline Eigen::VectorXd intersection_point(const ProblemInstance& inst, const PrimalSolution& sol) {
    if (inst.epsilon == 0.0) return inst.x;
    const double dc = inst.delta * sol.scale;
    detail::require(inst.epsilon + dc > 0.0, "intersection_point: degenerate scaling");
    return (inst.epsilon * inst.phi.apply(sol.f) + dc * inst.x) / (inst.epsilon + dc);
}

/// Closed-form optimal dual from an optimal primal: lambda = w / ||w||' with
/// w = x - phi(f). When ||w||' vanishes (only possible with delta = 0 and
/// B(x, eps) tangent to image(phi)) there is no optimal dual and the
/// certificate is flagged degenerate.
inline DualCertificate extract_dual(const ProblemInstance& inst, const Eigen::VectorXd& f_star) {
    detail::require(f_star.size() == inst.code_dim(), "extract_dual: dimension mismatch");
    const Eigen::VectorXd w = inst.x - inst.phi.apply(f_star);
    const double dg = dual_gauge(w, inst);

    DualCertificate cert;
    if (dg <= 1e-9 * (1.0 + w.norm())) {
        cert.lambda = Eigen::VectorXd::Zero(inst.ambient_dim());
        cert.degenerate = inst.delta == 0.0;
        return cert;
    }
    cert.lambda = w / dg;
    cert.dual_gauge_norm = dual_gauge(cert.lambda, inst);
    cert.margin = margin(cert.lambda, inst);
    cert.in_Lambda = cert.margin > 0.0;
    return cert;
}

/// Checks the two membership conditions of the optimal dual set against a
/// trusted value of C^{1/p}.
inline DualCertificate check_lambda_membership(const Eigen::VectorXd& lambda, const ProblemInstance& inst,
                                               double c_onepth, double tol) {
    DualCertificate cert;
    cert.lambda = lambda;
    cert.dual_gauge_norm = dual_gauge(lambda, inst);
    cert.margin = margin(lambda, inst);
    cert.in_Lambda = std::abs(cert.dual_gauge_norm - 1.0) <= tol && std::abs(cert.margin - c_onepth) <= tol;
    return cert;
}

/// Magnitude of the saddle-point dual: (r q)^{1/(1-q)} C^{q/(p(1-q))}.
inline double saddle_lambda_scale(double C, double p, double r, double q) {
    detail::require(C >= 0.0, "saddle_lambda_scale: C must be >= 0");
    detail::require(p > 0.0, "saddle_lambda_scale: p must be > 0");
    detail::require(r > 0.0, "saddle_lambda_scale: r must be > 0");
    detail::require(q > 0.0 && q < 1.0, "saddle_lambda_scale: q must lie in (0,1)");
    return std::pow(r * q, 1.0 / (1.0 - q)) * std::pow(C, q / (p * (1.0 - q)));
}

/// Two-sided optimality report for a candidate solution/certificate pair.
struct CertificateReport {
    double primal_upper = infinite_cost;      // eta(h)^p
    double dual_lower = 0.0;                  // clamped normalized margin^p
    double gap = infinite_cost;               // primal_upper - dual_lower
    double active_constraint_residual = 0.0;  // | ||x - phi f|| - (eps + delta C^{1/p}) |
    DualCertificate lambda_report;
};

inline CertificateReport duality_report(const ProblemInstance& inst, const PrimalSolution& sol,
                                        const DualCertificate& cert) {
    CertificateReport report;
    const double p = inst.cost->order();

    const double theta = eta(sol.h, inst);
    report.primal_upper = is_infinite(theta) ? infinite_cost : std::pow(theta, p);

    const double dg = cert.lambda.size() == inst.ambient_dim() ? dual_gauge(cert.lambda, inst) : 0.0;
    if (dg > 0.0) {
        // margins <= 0 certify nothing, clamp before exponentiation
        const double normalized = std::max(0.0, margin(cert.lambda, inst) / dg);
        report.dual_lower = std::pow(normalized, p);
    }

    report.gap = is_infinite(report.primal_upper) ? infinite_cost : report.primal_upper - report.dual_lower;
    report.active_constraint_residual =
        std::abs((inst.x - inst.phi.apply(sol.f)).norm() - (inst.epsilon + inst.delta * sol.scale));
    report.lambda_report = cert;
    return report;
}

/// Builds a dual candidate by interpolation on the active support of f: the
/// minimum-norm lambda with phi^T lambda matching a cost subgradient at f,
/// normalized to unit dual gauge. Off-support coordinates that overshoot the
/// sign box are promoted into the equality set and the system re-solved, so
/// the normalization stays tight. Valid lower-bound certificate for any
/// input; exact when f is optimal and its support correct.
inline std::optional<DualCertificate> interpolation_dual(const ProblemInstance& inst,
                                                         const Eigen::VectorXd& f) {
    detail::require(f.size() == inst.code_dim(), "interpolation_dual: dimension mismatch");
    const std::string kind = inst.cost->name();
    const Eigen::MatrixXd& A = inst.phi.matrix();

    std::vector<Eigen::Index> support;
    std::vector<double> target;
    if (kind == "l2") {
        const double norm = f.norm();
        if (norm <= 0.0) return std::nullopt;
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            support.push_back(i);
            target.push_back(f[i] / norm);
        }
    } else {
        const double fmax = f.cwiseAbs().maxCoeff();
        if (fmax <= 0.0) return std::nullopt;
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            if (std::abs(f[i]) <= 1e-10 * fmax) continue;
            support.push_back(i);
            target.push_back(kind == "l1_nonneg" ? 1.0 : (f[i] >= 0.0 ? 1.0 : -1.0));
        }
        if (support.empty()) return std::nullopt;
    }

    std::optional<DualCertificate> best;
    for (int round = 0; round < 12; ++round) {
        Eigen::MatrixXd basis(A.rows(), static_cast<Eigen::Index>(support.size()));
        Eigen::VectorXd rhs(static_cast<Eigen::Index>(support.size()));
        for (std::size_t j = 0; j < support.size(); ++j) {
            basis.col(static_cast<Eigen::Index>(j)) = A.col(support[j]);
            rhs[static_cast<Eigen::Index>(j)] = target[j];
        }
        const Eigen::VectorXd lambda =
            basis.completeOrthogonalDecomposition().pseudoInverse().transpose() * rhs;
        if (!lambda.allFinite()) break;
        const double dg = dual_gauge(lambda, inst);
        if (dg <= 1e-12) break;

        DualCertificate cert;
        cert.lambda = lambda / dg;
        cert.dual_gauge_norm = 1.0;
        cert.margin = margin(cert.lambda, inst);
        cert.in_Lambda = cert.margin > 0.0;
        if (!best || cert.margin > best->margin) best = cert;

        if (kind == "l2" || support.size() >= static_cast<std::size_t>(A.rows())) break;
        const Eigen::VectorXd g = A.transpose() * lambda;
        bool extended = false;
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            if (std::find(support.begin(), support.end(), i) != support.end()) continue;
            const double value = kind == "l1_nonneg" ? g[i] : std::abs(g[i]);
            if (value > 1.0 + 1e-12) {
                support.push_back(i);
                target.push_back(kind == "l1_nonneg" ? 1.0 : (g[i] >= 0.0 ? 1.0 : -1.0));
                extended = true;
            }
        }
        if (!extended) break;
    }
    return best;
}

} // namespace lipdual
