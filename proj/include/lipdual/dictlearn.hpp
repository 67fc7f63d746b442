#pragma once

#include "lipdual/minmax.hpp"

namespace lipdual {

/// Samples x_t (columns) with per-sample error thresholds eps_t.
struct Dataset {
    Eigen::MatrixXd samples;   // n x T
    Eigen::VectorXd epsilons;  // T, all >= 0

    Eigen::Index ambient_dim() const { return samples.rows(); }
    Eigen::Index size() const { return samples.cols(); }

    void validate() const {
        detail::require(samples.cols() > 0, "dataset is empty");
        detail::require_finite(samples, "dataset samples");
        detail::require(epsilons.size() == samples.cols(), "dataset: one epsilon per sample required");
        detail::require_finite(epsilons, "dataset epsilons");
        detail::require((epsilons.array() >= 0.0).all(), "dataset epsilons must be >= 0");
    }
};

/// Learned dictionary: n x K columns, each inside the unit Euclidean ball.
struct Dictionary {
    Eigen::MatrixXd columns;

    Eigen::Index ambient_dim() const { return columns.rows(); }
    Eigen::Index atom_count() const { return columns.cols(); }

    LinearOperator as_operator() const { return LinearOperator(columns); }
};

/// Euclidean projection onto the product of unit column balls: columns with
/// norm above one are rescaled, others pass through.
inline Dictionary project_dictionary(const Eigen::MatrixXd& m) {
    detail::require_finite(m, "dictionary matrix");
    Dictionary dict{m};
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
        const double norm = dict.columns.col(k).norm();
        if (norm > 1.0) dict.columns.col(k) /= norm;
    }
    return dict;
}

struct LearnConfig {
    int outer_iters = 30;
    CostKind cost_kind = CostKind::l1;
    SolverConfig inner;
    int dict_inner_iters = 40;
    double dict_step = 0.5;
    std::uint64_t seed = 0;
    double flatten_rtol = 1e-5;  // stop when the trace moves less than this
    int flatten_window = 3;      // ... over this many rounds
};

struct EncodeResult {
    Eigen::MatrixXd atoms;  // K x T, normalized representations h_t
    Eigen::MatrixXd duals;  // n x T, unscaled saddle duals
    Eigen::VectorXd costs;  // T, per-sample encoding cost C_t
    std::vector<SolveStatus> statuses;

    double average_cost() const { return costs.size() > 0 ? costs.mean() : 0.0; }

    bool flagged(Eigen::Index t) const {
        return statuses[static_cast<std::size_t>(t)] == SolveStatus::budget_exceeded ||
               statuses[static_cast<std::size_t>(t)] == SolveStatus::infeasible;
    }
};

struct LearnState {
    Dictionary dictionary;
    Eigen::MatrixXd atoms;  // K x T
    Eigen::MatrixXd duals;  // n x T
    std::vector<double> cost_trace;
};

/// Encodes every sample against a fixed dictionary by solving its inverse
/// problem. Samples inside their own error ball take the zero representation
/// at zero cost. Budget failures are flagged per sample, never fatal.
inline EncodeResult encode_all(const Dictionary& dict, const Dataset& data, double delta,
                               const LearnConfig& cfg) {
    data.validate();
    detail::require(dict.ambient_dim() == data.ambient_dim(), "encode_all: dimension mismatch");
    const Eigen::Index K = dict.atom_count();
    const Eigen::Index T = data.size();
    const CostPtr cost = make_cost(cfg.cost_kind, K);

    EncodeResult out;
    out.atoms = Eigen::MatrixXd::Zero(K, T);
    out.duals = Eigen::MatrixXd::Zero(dict.ambient_dim(), T);
    out.costs = Eigen::VectorXd::Zero(T);
    out.statuses.assign(static_cast<std::size_t>(T), SolveStatus::zero_solution);

    for (Eigen::Index t = 0; t < T; ++t) {
        const Eigen::VectorXd x = data.samples.col(t);
        const double eps = data.epsilons[t];
        if (x.norm() <= eps) continue;  // zero representation, zero cost

        const ProblemInstance inst(x, dict.as_operator(), eps, delta, cost);
        const SolveResult sol = solve(inst, cfg.inner);
        out.statuses[static_cast<std::size_t>(t)] = sol.status;
        if (sol.status == SolveStatus::infeasible) continue;
        out.atoms.col(t) = sol.primal.h;
        out.duals.col(t) = sol.lambda;
        out.costs[t] = is_infinite(sol.primal.cost_value)
                           ? std::pow(sol.dual_lower, cost->order())
                           : sol.primal.cost_value;
    }
    return out;
}

namespace detail {

/// Certified average-cost bound for the atoms h_t under a candidate
/// dictionary. Per sample it takes the better of two valid upper bounds on
/// the encoding cost: the exact re-scaling of the ray D h_t, and the scale
/// elimination at the frozen representation f_t (always finite when
/// delta > 0). Equals the achieved encoding cost at the incumbent D, so it
/// serves as the monotone line-search functional for the D-update.
inline double elimination_bound(const Eigen::MatrixXd& D, const Eigen::VectorXd& x, double eps,
                                double delta, const Eigen::VectorXd& f, const CostModel& cost) {
    const double c = cost.evaluate(f);
    if (is_infinite(c)) return infinite_cost;
    const double p = cost.order();
    const double resid = (x - D * f).norm();
    if (delta > 0.0) {
        const double scale = std::max(std::pow(c, 1.0 / p), (resid - eps) / delta);
        return std::pow(std::max(scale, 0.0), p);
    }
    return resid <= eps + 1e-12 ? c : infinite_cost;
}

inline double dictionary_objective(const Eigen::MatrixXd& D, const Dataset& data, double delta,
                                   const Eigen::MatrixXd& atoms, const Eigen::MatrixXd& reps,
                                   const CostModel& cost) {
    const double p = cost.order();
    const bool sparse_kind = cost.name() != "l2";
    double total = 0.0;
    for (Eigen::Index t = 0; t < data.size(); ++t) {
        const Eigen::VectorXd x = data.samples.col(t);
        const double eps = data.epsilons[t];
        if (x.norm() <= eps) continue;

        double bound = infinite_cost;
        const double theta = smallest_intersection_scale(x, D * atoms.col(t), eps, delta);
        if (!is_infinite(theta)) bound = std::pow(theta, p);

        const Eigen::VectorXd f = reps.col(t);
        bound = std::min(bound, elimination_bound(D, x, eps, delta, f, cost));

        // coefficients re-fit on the frozen support under the candidate D
        if (sparse_kind) {
            std::vector<Eigen::Index> support;
            const double fmax = f.cwiseAbs().maxCoeff();
            for (Eigen::Index i = 0; i < f.size() && support.size() < 8; ++i)
                if (std::abs(f[i]) > 1e-12 * std::max(fmax, 1e-30)) support.push_back(i);
            if (!support.empty()) {
                Eigen::MatrixXd block(D.rows(), static_cast<Eigen::Index>(support.size()));
                for (std::size_t j = 0; j < support.size(); ++j)
                    block.col(static_cast<Eigen::Index>(j)) = D.col(support[j]);
                const Eigen::VectorXd fs = block.completeOrthogonalDecomposition().solve(x);
                Eigen::VectorXd refit = Eigen::VectorXd::Zero(f.size());
                for (std::size_t j = 0; j < support.size(); ++j) refit[support[j]] = fs[static_cast<Eigen::Index>(j)];
                bound = std::min(bound, elimination_bound(D, x, eps, delta, refit, cost));
            }
        }
        if (is_infinite(bound)) return infinite_cost;
        total += bound;
    }
    return total / static_cast<double>(data.size());
}

inline void dict_dual_step(Eigen::VectorXd& lambda, const Eigen::VectorXd& x, double eps, double delta,
                           const Eigen::VectorXd& v, double r, double q, double step0) {
    const auto margin_of = [&](const Eigen::VectorXd& lam) { return lam.dot(x) - eps * lam.norm(); };
    const auto value = [&](const Eigen::VectorXd& lam, double m) {
        return r * std::pow(m, q) - (delta * lam.norm() + lam.dot(v));
    };
    const double m0 = margin_of(lambda);
    if (m0 <= 0.0) {
        lambda = x / x.norm();
        return;
    }
    const double lnorm = lambda.norm();
    const Eigen::VectorXd unit =
        lnorm > 0.0 ? Eigen::VectorXd(lambda / lnorm) : Eigen::VectorXd(Eigen::VectorXd::Zero(lambda.size()));
    const Eigen::VectorXd g = r * q * std::pow(m0, q - 1.0) * (x - eps * unit) - (delta * unit + v);
    const double j0 = value(lambda, m0);
    double t = step0;
    for (int bt = 0; bt < 40; ++bt) {
        Eigen::VectorXd cand = lambda + t * g;
        const double mc = margin_of(cand);
        if (mc > 0.0 && value(cand, mc) >= j0 - 1e-13 * (1.0 + std::abs(j0))) {
            lambda = std::move(cand);
            return;
        }
        t *= 0.5;
    }
}

} // namespace detail

/// One dictionary update with the atoms held fixed: projected ascent-descent
/// on the averaged min-max objective (linear in D), followed by a line search
/// on the certified cost bound so the outer trace never goes up.
inline Dictionary update_dictionary(const LearnState& state, const Dataset& data, double delta,
                                    const LearnConfig& cfg) {
    data.validate();
    const Eigen::Index n = data.ambient_dim();
    const Eigen::Index T = data.size();
    const Eigen::MatrixXd& D_old = state.dictionary.columns;
    detail::require(state.atoms.cols() == T && state.atoms.rows() == D_old.cols(),
                    "update_dictionary: atoms do not match the dataset/dictionary");

    const CostPtr cost = make_cost(cfg.cost_kind, D_old.cols());
    const double p = cost->order();
    const DefaultParams params = default_params(p);

    std::vector<Eigen::Index> active;
    for (Eigen::Index t = 0; t < T; ++t)
        if (data.samples.col(t).norm() > data.epsilons[t]) active.push_back(t);
    if (active.empty()) return state.dictionary;

    // freeze the representations f_t = theta_t h_t delivered by the encoder
    Eigen::MatrixXd reps = Eigen::MatrixXd::Zero(D_old.cols(), T);
    for (Eigen::Index t : active) {
        const double theta = detail::smallest_intersection_scale(
            data.samples.col(t), D_old * state.atoms.col(t), data.epsilons[t], delta);
        if (!is_infinite(theta)) reps.col(t) = theta * state.atoms.col(t);
    }

    Eigen::MatrixXd duals(n, T);
    duals.setZero();
    for (Eigen::Index t : active) {
        Eigen::VectorXd warm = state.duals.cols() == T ? Eigen::VectorXd(state.duals.col(t))
                                                       : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
        duals.col(t) = warm.norm() > 0.0 ? warm : Eigen::VectorXd(data.samples.col(t).normalized());
    }

    const auto objective_at = [&](const Eigen::MatrixXd& candidate) {
        return detail::dictionary_objective(candidate, data, delta, state.atoms, reps, *cost);
    };

    Eigen::MatrixXd D = D_old;
    double value = objective_at(D_old);

    for (int j = 0; j < cfg.dict_inner_iters; ++j) {
        // ascent side: for reachable rays the inner supremum is available in
        // closed form (the scaled residual direction); otherwise take one
        // backtracking ascent step on the stored dual
        Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, D.cols());
        for (Eigen::Index t : active) {
            const Eigen::VectorXd x = data.samples.col(t);
            const double eps = data.epsilons[t];
            const Eigen::VectorXd v = D * state.atoms.col(t);
            const double theta = detail::smallest_intersection_scale(x, v, eps, delta);
            Eigen::VectorXd lambda = duals.col(t);
            if (!is_infinite(theta) && theta > 0.0) {
                const Eigen::VectorXd w = x - theta * v;
                const double reach = delta * w.norm() + w.dot(v);
                if (reach > 1e-12) {
                    const double scale = std::pow(params.r * params.q, 1.0 / (1.0 - params.q)) *
                                         std::pow(theta, params.q / (1.0 - params.q));
                    lambda = scale / reach * w;
                }
            } else {
                detail::dict_dual_step(lambda, x, eps, delta, v, params.r, params.q,
                                       cfg.inner.lambda_step);
            }
            duals.col(t) = lambda;
            grad.noalias() += lambda * state.atoms.col(t).transpose();
        }
        grad /= static_cast<double>(T);
        const double gnorm = grad.norm();
        if (gnorm <= 1e-14) break;

        // descent side: projected step with geometric backoff on the
        // certified bound, so the update is monotone step by step
        bool moved = false;
        double step = cfg.dict_step * std::sqrt(static_cast<double>(D.cols())) / gnorm;
        for (int bt = 0; bt < 16; ++bt, step *= 0.5) {
            const Eigen::MatrixXd candidate = project_dictionary(D + step * grad).columns;
            const double candidate_value = objective_at(candidate);
            if (candidate_value < value - 1e-14) {
                D = candidate;
                value = candidate_value;
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }

    // a column shorter than the unit sphere is pure waste: pushing it back
    // to unit norm shrinks the coefficient of every representation using it
    const auto renormalize_up = [&](Eigen::MatrixXd m) {
        if (cost->name() == "l1" || cost->name() == "l1_nonneg" || cost->name() == "l2")
            for (Eigen::Index k = 0; k < m.cols(); ++k) {
                const double norm = m.col(k).norm();
                if (norm > 1e-12 && norm < 1.0) m.col(k) /= norm;
            }
        return m;
    };
    D = renormalize_up(D);

    // residual-refit proposal: the dictionary reconstructing the frozen
    // representations best. Its certified bound is often loose, so it is
    // judged by a true re-encode and kept only when it genuinely wins.
    {
        Eigen::MatrixXd gram = reps * reps.transpose();
        gram.diagonal().array() += 1e-9;
        Eigen::MatrixXd proposal =
            project_dictionary(data.samples * reps.transpose() * gram.inverse()).columns;
        for (Eigen::Index k = 0; k < proposal.cols(); ++k)  // unused atoms keep their direction
            if (reps.row(k).cwiseAbs().maxCoeff() <= 1e-10) proposal.col(k) = D.col(k);
        proposal = renormalize_up(std::move(proposal));
        const double incumbent_cost = encode_all(Dictionary{D}, data, delta, cfg).average_cost();
        const double proposal_cost = encode_all(Dictionary{proposal}, data, delta, cfg).average_cost();
        if (proposal_cost < incumbent_cost) return Dictionary{proposal};
    }
    return Dictionary{D};
}

struct LearnResult {
    Dictionary dictionary;
    std::vector<double> cost_trace;
    std::vector<Eigen::Index> flagged_samples;  // budget or infeasibility, by sample index
};

/// Alternating dictionary learning: encode with D fixed, then update D with
/// the atoms fixed, tracking the average encoding cost per round.
inline LearnResult learn(const Dataset& data, Eigen::Index K, double delta, const LearnConfig& cfg) {
    data.validate();
    detail::require(K >= 1, "learn: K must be >= 1");
    detail::require(cfg.outer_iters >= 1, "learn: outer_iters must be >= 1");
    detail::require(delta >= 0.0, "learn: delta must be >= 0");

    Rng rng(cfg.seed);
    LearnState state;
    state.dictionary = project_dictionary(rng.normal_matrix(data.ambient_dim(), K));

    LearnResult out;
    std::vector<bool> flagged(static_cast<std::size_t>(data.size()), false);

    for (int round = 0; round < cfg.outer_iters; ++round) {
        const EncodeResult enc = encode_all(state.dictionary, data, delta, cfg);
        state.atoms = enc.atoms;
        state.duals = enc.duals;
        state.cost_trace.push_back(enc.average_cost());
        for (Eigen::Index t = 0; t < data.size(); ++t)
            if (enc.flagged(t)) flagged[static_cast<std::size_t>(t)] = true;

        const auto& trace = state.cost_trace;
        if (static_cast<int>(trace.size()) > cfg.flatten_window) {
            const double recent = trace[trace.size() - 1 - static_cast<std::size_t>(cfg.flatten_window)];
            if (std::abs(recent - trace.back()) <= cfg.flatten_rtol * (1.0 + std::abs(trace.back()))) break;
        }
        if (round + 1 < cfg.outer_iters)
            state.dictionary = update_dictionary(state, data, delta, cfg);
    }

    out.dictionary = state.dictionary;
    out.cost_trace = state.cost_trace;
    for (Eigen::Index t = 0; t < data.size(); ++t)
        if (flagged[static_cast<std::size_t>(t)]) out.flagged_samples.push_back(t);
    return out;
}

} // namespace lipdual
