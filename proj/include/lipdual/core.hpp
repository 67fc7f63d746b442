#pragma once

#include <utility>

#include "lipdual/common.hpp"
#include "lipdual/costs.hpp"

namespace lipdual {

/// Dense linear map R^K -> R^n stored as an n x K matrix.
class LinearOperator {
public:
    explicit LinearOperator(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
        detail::require(matrix_.rows() > 0 && matrix_.cols() > 0, "operator must be non-empty");
        detail::require_finite(matrix_, "operator matrix");
    }

    Eigen::Index output_dim() const { return matrix_.rows(); }  // n
    Eigen::Index input_dim() const { return matrix_.cols(); }   // K

    const Eigen::MatrixXd& matrix() const { return matrix_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& f) const {
        detail::require(f.size() == input_dim(), "apply: dimension mismatch");
        return matrix_ * f;
    }

    Eigen::VectorXd adjoint_apply(const Eigen::VectorXd& y) const {
        detail::require(y.size() == output_dim(), "adjoint_apply: dimension mismatch");
        return matrix_.transpose() * y;
    }

private:
    Eigen::MatrixXd matrix_;
};

inline Eigen::VectorXd apply(const LinearOperator& phi, const Eigen::VectorXd& f) {
    return phi.apply(f);
}

inline Eigen::VectorXd adjoint_apply(const LinearOperator& phi, const Eigen::VectorXd& y) {
    return phi.adjoint_apply(y);
}

/// Orthogonal projector onto image(phi), via column-pivoted QR with a
/// relative rank cutoff of 1e-10 against the largest column norm.
class ImageProjection {
public:
    explicit ImageProjection(const LinearOperator& phi) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi.matrix());
        qr.setThreshold(1e-10);
        rank_ = qr.rank();
        const Eigen::Index n = phi.output_dim();
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
        basis_ = q.leftCols(rank_);
        complement_ = q.rightCols(n - rank_);
    }

    Eigen::Index rank() const { return rank_; }

    /// Orthonormal basis of image(phi), n x rank.
    const Eigen::MatrixXd& basis() const { return basis_; }

    /// Orthonormal basis of the orthogonal complement, n x (n - rank).
    const Eigen::MatrixXd& complement() const { return complement_; }

    Eigen::VectorXd project(const Eigen::VectorXd& y) const {
        return basis_ * (basis_.transpose() * y);
    }

    double residual(const Eigen::VectorXd& y) const {
        if (complement_.cols() == 0) return 0.0;
        return (complement_.transpose() * y).norm();
    }

private:
    Eigen::Index rank_ = 0;
    Eigen::MatrixXd basis_;
    Eigen::MatrixXd complement_;
};

/// One linear inverse problem: recover f with phi(f) close to x, paying cost.
/// The error budget is epsilon + delta * (cost scale); see the solver modules.
struct ProblemInstance {
    Eigen::VectorXd x;
    LinearOperator phi;
    double epsilon = 0.0;
    double delta = 0.0;
    CostPtr cost;

    ProblemInstance(Eigen::VectorXd x_, LinearOperator phi_, double epsilon_, double delta_, CostPtr cost_)
        : x(std::move(x_)), phi(std::move(phi_)), epsilon(epsilon_), delta(delta_), cost(std::move(cost_)) {
        detail::require_finite(x, "x");
        detail::require(std::isfinite(epsilon) && epsilon >= 0.0, "epsilon must be finite and >= 0");
        detail::require(std::isfinite(delta) && delta >= 0.0, "delta must be finite and >= 0");
        detail::require(cost != nullptr, "cost model is required");
        detail::require(x.size() == phi.output_dim(), "x dimension must match operator output");
        detail::require(cost->dimension() == phi.input_dim(), "cost dimension must match operator input");
    }

    Eigen::Index ambient_dim() const { return phi.output_dim(); }
    Eigen::Index code_dim() const { return phi.input_dim(); }
};

/// Optimal (or candidate) primal point. Invariants: cost_value = scale^p,
/// f = scale * h, and h lies in the cost's unit sublevel set.
struct PrimalSolution {
    double cost_value = 0.0;  // C
    double scale = 0.0;       // C^(1/p)
    Eigen::VectorXd f;
    Eigen::VectorXd h;
    double residual_norm = 0.0;  // ||x - phi(f)||
};

/// Dual vector report. in_Lambda means lambda has unit dual-gauge norm and
/// its margin <lambda, x> - epsilon ||lambda|| certifies the optimal value.
/// degenerate marks the delta = 0 case where no optimal dual exists.
struct DualCertificate {
    Eigen::VectorXd lambda;
    double dual_gauge_norm = 0.0;
    double margin = 0.0;
    bool in_Lambda = false;
    bool degenerate = false;
};

enum class Feasibility { feasible, infeasible };

inline Feasibility classify_feasibility(const ProblemInstance& inst, const ImageProjection& proj,
                                        double tol = 1e-9) {
    if (inst.delta > 0.0) return Feasibility::feasible;
    return proj.residual(inst.x) <= inst.epsilon + tol ? Feasibility::feasible : Feasibility::infeasible;
}

inline Feasibility classify_feasibility(const ProblemInstance& inst, double tol = 1e-9) {
    return classify_feasibility(inst, ImageProjection(inst.phi), tol);
}

} // namespace lipdual
