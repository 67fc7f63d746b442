#pragma once

#include <memory>
#include <string>

#include "lipdual/common.hpp"

namespace lipdual {

enum class CostKind { l1, l2, l1_nonneg };

inline std::string to_string(CostKind kind) {
    switch (kind) {
        case CostKind::l1: return "l1";
        case CostKind::l2: return "l2";
        case CostKind::l1_nonneg: return "l1_nonneg";
    }
    return "?";
}

/// Positively homogeneous cost over R^K with convex, compact unit sublevel
/// set V = {f : c(f) <= 1}. Every algorithm in the library talks to a cost
/// through the four oracles below:
///
///   evaluate(f)   -> c(f), possibly the infinite sentinel (cone violation)
///   support(g)    -> max_{h in V} <g, h>, always >= 0 because 0 is in V
///   lmo(g)        -> a maximizer of <g, .> over V
///   membership(f) -> c(f) <= 1 + tol
///
/// Implementations must be positively homogeneous of some order p > 0.
class CostModel {
public:
    virtual ~CostModel() = default;

    virtual std::string name() const = 0;
    virtual Eigen::Index dimension() const = 0;
    virtual double order() const = 0;

    virtual double evaluate(const Eigen::VectorXd& f) const = 0;
    virtual double support(const Eigen::VectorXd& g) const = 0;
    virtual Eigen::VectorXd lmo(const Eigen::VectorXd& g) const = 0;

    bool membership(const Eigen::VectorXd& f, double tol = 1e-9) const {
        const double c = evaluate(f);
        return !is_infinite(c) && c <= 1.0 + tol;
    }

protected:
    void check_dim(const Eigen::VectorXd& v) const {
        detail::require(v.size() == dimension(), name() + " cost: dimension mismatch (got " +
                                                     std::to_string(v.size()) + ", expected " +
                                                     std::to_string(dimension()) + ")");
    }
};

using CostPtr = std::shared_ptr<const CostModel>;

/// c(f) = sum_i |f_i|; V is the l1 ball, supported on signed basis vectors.
class L1Cost final : public CostModel {
public:
    explicit L1Cost(Eigen::Index dim) : dim_(dim) { detail::require(dim > 0, "cost dimension must be positive"); }

    std::string name() const override { return "l1"; }
    Eigen::Index dimension() const override { return dim_; }
    double order() const override { return 1.0; }

    double evaluate(const Eigen::VectorXd& f) const override {
        check_dim(f);
        return f.lpNorm<1>();
    }

    double support(const Eigen::VectorXd& g) const override {
        check_dim(g);
        return g.lpNorm<Eigen::Infinity>();
    }

    Eigen::VectorXd lmo(const Eigen::VectorXd& g) const override {
        check_dim(g);
        // lowest index wins ties, so traces are reproducible
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < dim_; ++i)
            if (std::abs(g[i]) > std::abs(g[best])) best = i;
        Eigen::VectorXd h = Eigen::VectorXd::Zero(dim_);
        h[best] = g[best] >= 0.0 ? 1.0 : -1.0;
        return h;
    }

private:
    Eigen::Index dim_;
};

/// c(f) = ||f||_2; V is the Euclidean ball.
class L2Cost final : public CostModel {
public:
    explicit L2Cost(Eigen::Index dim) : dim_(dim) { detail::require(dim > 0, "cost dimension must be positive"); }

    std::string name() const override { return "l2"; }
    Eigen::Index dimension() const override { return dim_; }
    double order() const override { return 1.0; }

    double evaluate(const Eigen::VectorXd& f) const override {
        check_dim(f);
        return f.norm();
    }

    double support(const Eigen::VectorXd& g) const override {
        check_dim(g);
        return g.norm();
    }

    Eigen::VectorXd lmo(const Eigen::VectorXd& g) const override {
        check_dim(g);
        const double norm = g.norm();
        if (norm == 0.0) return Eigen::VectorXd::Zero(dim_);
        return g / norm;
    }

private:
    Eigen::Index dim_;
};

/// c(f) = sum_i f_i on the nonnegative orthant, infinite sentinel outside it.
/// V is the simplex-with-origin {f >= 0, sum f <= 1} (conic variant of l1).
class L1NonnegCost final : public CostModel {
public:
    explicit L1NonnegCost(Eigen::Index dim) : dim_(dim) {
        detail::require(dim > 0, "cost dimension must be positive");
    }

    std::string name() const override { return "l1_nonneg"; }
    Eigen::Index dimension() const override { return dim_; }
    double order() const override { return 1.0; }

    double evaluate(const Eigen::VectorXd& f) const override {
        check_dim(f);
        if ((f.array() < 0.0).any()) return infinite_cost;
        return f.sum();
    }

    double support(const Eigen::VectorXd& g) const override {
        check_dim(g);
        return std::max(0.0, g.maxCoeff());
    }

    Eigen::VectorXd lmo(const Eigen::VectorXd& g) const override {
        check_dim(g);
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < dim_; ++i)
            if (g[i] > g[best]) best = i;
        Eigen::VectorXd h = Eigen::VectorXd::Zero(dim_);
        if (g[best] > 0.0) h[best] = 1.0;  // otherwise the zero atom is optimal
        return h;
    }

private:
    Eigen::Index dim_;
};

inline CostPtr make_cost(CostKind kind, Eigen::Index dimension) {
    switch (kind) {
        case CostKind::l1: return std::make_shared<L1Cost>(dimension);
        case CostKind::l2: return std::make_shared<L2Cost>(dimension);
        case CostKind::l1_nonneg: return std::make_shared<L1NonnegCost>(dimension);
    }
    throw std::invalid_argument("unknown cost kind");
}

inline CostPtr make_cost(const std::string& kind, Eigen::Index dimension) {
    if (kind == "l1") return make_cost(CostKind::l1, dimension);
    if (kind == "l2") return make_cost(CostKind::l2, dimension);
    if (kind == "l1_nonneg") return make_cost(CostKind::l1_nonneg, dimension);
    throw std::invalid_argument("unknown cost kind '" + kind + "'");
}

} // namespace lipdual
