#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace lipdual {

/// Distinguished value for "no feasible point / unbounded cost". It is only
/// ever compared against or returned, never fed into arithmetic.
inline constexpr double infinite_cost = std::numeric_limits<double>::infinity();

inline bool is_infinite(double v) { return std::isinf(v); }

namespace detail {

inline void require(bool condition, const std::string& what) {
    if (!condition) throw std::invalid_argument(what);
}

template <typename Derived>
inline void require_finite(const Eigen::DenseBase<Derived>& m, const std::string& name) {
    if (!m.allFinite()) throw std::invalid_argument(name + " has non-finite entries");
}

} // namespace detail

/// Deterministic random source. Draws are reproducible for a given seed on
/// any platform (no reliance on implementation-defined std distributions).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        spare_ = radius * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return radius * std::cos(2.0 * M_PI * u2);
    }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
        return m;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace lipdual
