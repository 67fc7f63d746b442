#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lipdual/certificates.hpp"

namespace lipdual {

/// Parameters (r, q) for which the saddle value equals the optimal cost
/// itself, together with the scale factor s(r, q) (equal to 1 there).
struct DefaultParams {
    double r;
    double q;
    double s;
};

inline double saddle_value_scale(double r, double q) {
    detail::require(r > 0.0 && q > 0.0 && q < 1.0, "saddle_value_scale: need r > 0, q in (0,1)");
    return (1.0 - q) * std::pow(std::pow(q, q) * r, 1.0 / (1.0 - q));
}

inline DefaultParams default_params(double p) {
    detail::require(p > 0.0, "default_params: p must be > 0");
    DefaultParams out;
    out.r = (1.0 + p) * std::pow(p, -p / (1.0 + p));
    out.q = p / (1.0 + p);
    out.s = saddle_value_scale(out.r, out.q);
    return out;
}

/// Saddle objective r (<lambda,x> - eps||lambda||)^q - (delta||lambda|| + <lambda, phi(h)>),
/// defined on the open feasible set where the margin is positive.
inline double objective(const Eigen::VectorXd& lambda, const Eigen::VectorXd& h,
                        const ProblemInstance& inst, double r, double q) {
    detail::require(r > 0.0 && q > 0.0 && q < 1.0, "objective: need r > 0, q in (0,1)");
    const double m = margin(lambda, inst);
    detail::require(m > 0.0, "objective: margin must be positive");
    return r * std::pow(m, q) - (inst.delta * lambda.norm() + lambda.dot(inst.phi.apply(h)));
}

/// Supergradient of the (concave) saddle objective in lambda.
inline Eigen::VectorXd grad_lambda(const Eigen::VectorXd& lambda, const Eigen::VectorXd& h,
                                   const ProblemInstance& inst, double r, double q) {
    detail::require(r > 0.0 && q > 0.0 && q < 1.0, "grad_lambda: need r > 0, q in (0,1)");
    const double m = margin(lambda, inst);
    detail::require(m > 0.0, "grad_lambda: margin must be positive");
    const double lnorm = lambda.norm();
    Eigen::VectorXd unit = lnorm > 0.0 ? Eigen::VectorXd(lambda / lnorm)
                                       : Eigen::VectorXd(Eigen::VectorXd::Zero(lambda.size()));
    return r * q * std::pow(m, q - 1.0) * (inst.x - inst.epsilon * unit) -
           (inst.delta * unit + inst.phi.apply(h));
}

enum class AveragingRule { harmonic_weights, fixed_weight };

struct SaddleState {
    int iteration;
    const Eigen::VectorXd& lambda;
    const Eigen::VectorXd& h;
    double margin_value;
    double objective_value;
    double best_eta;  // primal upper bound on the C^{1/p} scale
    const Eigen::VectorXd& best_h;
    double dual_lower;
};

struct SolverConfig {
    std::optional<double> r;  // default: default_params(p).r
    std::optional<double> q;  // default: default_params(p).q
    int max_iter = 20000;
    double tol = 1e-6;  // duality-gap target on the C^{1/p} scale
    double lambda_step = 0.1;
    AveragingRule averaging = AveragingRule::harmonic_weights;
    double fixed_weight = 0.05;
    std::uint64_t seed = 0;
    bool record_trace = false;
    std::function<void(const SaddleState&)> observer;
};

struct TraceRow {
    int iteration;
    double margin;
    double objective;
    double primal_upper;
    double dual_lower;
    double gap;
};

enum class SolveStatus { converged, zero_solution, infeasible, degenerate, budget_exceeded };

inline std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::zero_solution: return "zero_solution";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::degenerate: return "degenerate";
        case SolveStatus::budget_exceeded: return "budget_exceeded";
    }
    return "?";
}

struct SolveResult {
    SolveStatus status = SolveStatus::converged;
    PrimalSolution primal;
    DualCertificate certificate;
    double primal_upper = infinite_cost;  // bracket on the C^{1/p} scale
    double dual_lower = 0.0;
    int iterations = 0;
    Eigen::VectorXd lambda;  // final unscaled ascent iterate
    std::vector<TraceRow> trace;
};

class SolverBudgetError : public std::runtime_error {
public:
    SolverBudgetError(double lower, double upper)
        : std::runtime_error("solver budget exceeded; best bracket [" + std::to_string(lower) + ", " +
                             std::to_string(upper) + "] on the C^{1/p} scale"),
          lower_(lower),
          upper_(upper) {}

    double lower() const { return lower_; }
    double upper() const { return upper_; }

private:
    double lower_;
    double upper_;
};

namespace detail {

inline std::vector<Eigen::Index> ranked_support(const Eigen::VectorXd& g, const std::string& kind) {
    std::vector<Eigen::Index> idx;
    idx.reserve(static_cast<std::size_t>(g.size()));
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (kind == "l1_nonneg" && g[i] <= 0.0) continue;
        idx.push_back(i);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(g[a]) > std::abs(g[b]);
    });
    return idx;
}

struct SaddleLoop {
    const ProblemInstance& inst;
    const SolverConfig& cfg;
    bool eliminated;
    double p, r, q;
    double xnorm;

    Eigen::VectorXd lambda;
    Eigen::VectorXd h;
    Eigen::VectorXd phi_h;

    bool exact_path = false;  // epsilon = delta = 0: feasible points satisfy phi(f) = x
    double best_theta = infinite_cost;
    Eigen::VectorXd best_f;
    Eigen::VectorXd best_dir;

    double best_dual = 0.0;
    DualCertificate best_dual_cert;
    Eigen::VectorXd dual_unit;  // unit direction of the best normalized dual
    bool polish_ties = false;   // terminal polish may replace equally good candidates

    std::vector<TraceRow> trace;

    SaddleLoop(const ProblemInstance& inst_, const SolverConfig& cfg_, bool eliminated_)
        : inst(inst_), cfg(cfg_), eliminated(eliminated_) {
        p = inst.cost->order();
        const DefaultParams def = default_params(p);
        r = cfg.r.value_or(def.r);
        q = cfg.q.value_or(def.q);
        require(r > 0.0, "solver: r must be > 0");
        require(q > 0.0 && q < 1.0, "solver: q must lie in (0,1)");
        require(cfg.max_iter > 0, "solver: max_iter must be positive");
        require(cfg.tol > 0.0, "solver: tol must be positive");
        require(cfg.lambda_step > 0.0, "solver: lambda_step must be positive");
        xnorm = inst.x.norm();
        exact_path = inst.delta == 0.0 && inst.epsilon == 0.0;
        best_f = Eigen::VectorXd::Zero(inst.code_dim());
        best_dir = Eigen::VectorXd::Zero(inst.code_dim());
    }

    double margin_of(const Eigen::VectorXd& lam) const { return margin(lam, inst); }

    double objective_power(const Eigen::VectorXd& lam, double m) const {
        return r * std::pow(m, q) - (inst.delta * lam.norm() + lam.dot(phi_h));
    }

    // eliminated-form surrogate with the auxiliary scalar frozen at eta_scalar
    double objective_elim(const Eigen::VectorXd& lam, double m, double eta_scalar) const {
        return eta_scalar + m / eta_scalar - (inst.delta * lam.norm() + lam.dot(phi_h));
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& lam, double m, double eta_scalar) const {
        const double lnorm = lam.norm();
        Eigen::VectorXd unit = lnorm > 0.0 ? Eigen::VectorXd(lam / lnorm)
                                           : Eigen::VectorXd(Eigen::VectorXd::Zero(lam.size()));
        const double coeff = eliminated ? 1.0 / eta_scalar : r * q * std::pow(m, q - 1.0);
        return coeff * (inst.x - inst.epsilon * unit) - (inst.delta * unit + phi_h);
    }

    // one backtracking ascent step; the accepted point keeps the margin
    // positive and does not decrease the (concave) objective
    bool ascent_step(double eta_scalar) {
        const double m0 = margin_of(lambda);
        const Eigen::VectorXd g = gradient(lambda, m0, eta_scalar);
        const double j0 = eliminated ? objective_elim(lambda, m0, eta_scalar) : objective_power(lambda, m0);
        double t = cfg.lambda_step;
        for (int bt = 0; bt < 60; ++bt) {
            Eigen::VectorXd cand = lambda + t * g;
            const double mc = margin_of(cand);
            if (mc > 0.0) {
                const double jc =
                    eliminated ? objective_elim(cand, mc, eta_scalar) : objective_power(cand, mc);
                if (jc >= j0 - 1e-13 * (1.0 + std::abs(j0))) {
                    lambda = std::move(cand);
                    return true;
                }
            }
            t *= 0.5;
        }
        return false;
    }

    void offer_dual(const DualCertificate& cert) {
        if (cert.margin > best_dual) {
            best_dual = cert.margin;
            best_dual_cert = cert;
            const double norm = cert.lambda.norm();
            if (norm > 0.0) dual_unit = cert.lambda / norm;
        }
    }

    void update_dual_from(const Eigen::VectorXd& raw) {
        const double dg = dual_gauge(raw, inst);
        if (dg <= 1e-14) return;
        DualCertificate cert;
        cert.lambda = raw / dg;
        cert.dual_gauge_norm = 1.0;
        cert.margin = margin_of(cert.lambda);
        offer_dual(cert);
    }

    bool accept_theta(double theta) const {
        if (theta < best_theta) return true;
        return polish_ties && theta <= best_theta + 1e-12 * (1.0 + best_theta);
    }

    void consider_direction(const Eigen::VectorXd& dir) {
        const double theta = smallest_intersection_scale(inst.x, inst.phi.apply(dir), inst.epsilon, inst.delta);
        if (accept_theta(theta)) {
            best_theta = theta;
            best_dir = dir;
            best_f = theta * dir;
            if (!exact_path) {
                const DualCertificate cert = extract_dual(inst, best_f);
                if (!cert.degenerate && cert.in_Lambda) offer_dual(cert);
            }
        }
    }

    void consider_exact_candidate(const Eigen::VectorXd& f) {
        const double c = inst.cost->evaluate(f);
        if (is_infinite(c) || c <= 1e-14) return;
        const double theta = std::pow(c, 1.0 / p);
        if (accept_theta(theta)) {
            best_theta = theta;
            best_f = f;
            best_dir = f / theta;
        }
        if (auto cert = interpolation_dual(inst, f)) offer_dual(*cert);
    }

    // Support-restricted refits. The current dual ranks coordinates; small
    // least-squares solves on leading supports produce primal candidates,
    // each certified through the exact scaling before being accepted.
    void refit_pass(const Eigen::VectorXd* source_override = nullptr) {
        const Eigen::VectorXd& source =
            source_override ? *source_override : (dual_unit.size() > 0 ? dual_unit : lambda);
        if (source.size() == 0) return;
        const Eigen::VectorXd g_ref = inst.phi.adjoint_apply(source);
        const std::vector<Eigen::Index> ranked = ranked_support(g_ref, inst.cost->name());
        if (ranked.empty()) return;
        const Eigen::Index cap =
            std::min<Eigen::Index>({static_cast<Eigen::Index>(ranked.size()), inst.ambient_dim(), 16});

        const double snorm = source.norm();
        const Eigen::VectorXd u =
            snorm > 0.0 ? Eigen::VectorXd(source / snorm) : Eigen::VectorXd(Eigen::VectorXd::Zero(source.size()));

        Eigen::MatrixXd cols(inst.ambient_dim(), cap);
        for (Eigen::Index m = 1; m <= cap; ++m) {
            cols.col(m - 1) = inst.phi.matrix().col(ranked[static_cast<std::size_t>(m - 1)]);
            const auto block = cols.leftCols(m);
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(block);

            if (exact_path) {
                Eigen::VectorXd fs = cod.solve(inst.x);
                if ((inst.x - block * fs).norm() > 1e-9 * (1.0 + xnorm)) continue;
                Eigen::VectorXd f = Eigen::VectorXd::Zero(inst.code_dim());
                for (Eigen::Index j = 0; j < m; ++j) f[ranked[static_cast<std::size_t>(j)]] = fs[j];
                if (inst.cost->name() == "l1_nonneg") {
                    if ((f.array() < -1e-12).any()) continue;
                    f = f.cwiseMax(0.0);
                }
                consider_exact_candidate(f);
                continue;
            }

            // active-boundary refit: phi(f) = x - (eps + delta theta) u with
            // theta tied to the cost of f itself
            Eigen::VectorXd u0 = cod.solve(inst.x - inst.epsilon * u);
            Eigen::VectorXd u1 = inst.delta > 0.0 ? Eigen::VectorXd(cod.solve(inst.delta * u))
                                                  : Eigen::VectorXd(Eigen::VectorXd::Zero(m));
            double theta = solve_consistency(u0, u1, ranked, m, g_ref);
            Eigen::VectorXd fs = theta > 0.0 ? Eigen::VectorXd(u0 - theta * u1) : u0;
            Eigen::VectorXd f = Eigen::VectorXd::Zero(inst.code_dim());
            for (Eigen::Index j = 0; j < m; ++j) f[ranked[static_cast<std::size_t>(j)]] = fs[j];
            if (inst.cost->name() == "l1_nonneg") f = f.cwiseMax(0.0);
            const double c = inst.cost->evaluate(f);
            if (is_infinite(c) || c <= 1e-14) continue;
            consider_direction(f / std::pow(c, 1.0 / p));

            const std::vector<Eigen::Index> prefix(ranked.begin(), ranked.begin() + m);
            if (auto pinned = newton_polish(prefix, f)) {
                const double cp = inst.cost->evaluate(*pinned);
                if (!is_infinite(cp) && cp > 1e-14) consider_direction(*pinned / std::pow(cp, 1.0 / p));
            }
        }
    }

    // Newton solve of the stationarity system on a fixed support S:
    //   A_S^T (x - A_S f) = nu * d(f),  ||x - A_S f|| = eps + delta c(f),
    // where d is the active cost subgradient (signs for l1-type, f/||f|| for
    // l2). Pins the primal to machine precision once the support is right.
    std::optional<Eigen::VectorXd> newton_polish(const std::vector<Eigen::Index>& support,
                                                 const Eigen::VectorXd& f_init) const {
        const std::string kind = inst.cost->name();
        if (kind != "l1" && kind != "l1_nonneg" && kind != "l2") return std::nullopt;
        const Eigen::Index m = static_cast<Eigen::Index>(support.size());
        if (m == 0 || exact_path) return std::nullopt;

        Eigen::MatrixXd A(inst.ambient_dim(), m);
        Eigen::VectorXd f(m), signs(m);
        for (Eigen::Index j = 0; j < m; ++j) {
            A.col(j) = inst.phi.matrix().col(support[static_cast<std::size_t>(j)]);
            f[j] = f_init[support[static_cast<std::size_t>(j)]];
            signs[j] = f[j] >= 0.0 ? 1.0 : -1.0;
        }
        if (kind == "l1_nonneg" && (signs.array() < 0.0).any()) return std::nullopt;

        double nu = 0.0;
        {
            const Eigen::VectorXd w0 = inst.x - A * f;
            nu = std::max(1e-12, (A.transpose() * w0).cwiseAbs().maxCoeff());
        }
        const Eigen::MatrixXd gram = A.transpose() * A;
        for (int it = 0; it < 25; ++it) {
            const Eigen::VectorXd w = inst.x - A * f;
            const double wn = w.norm();
            const double fn = f.norm();
            if (wn <= 1e-15 || (kind == "l2" && fn <= 1e-15)) return std::nullopt;
            const Eigen::VectorXd d = kind == "l2" ? Eigen::VectorXd(f / fn) : signs;
            const double cost_here = kind == "l2" ? fn : signs.dot(f);

            Eigen::VectorXd r1 = A.transpose() * w - nu * d;
            const double r2 = wn - inst.epsilon - inst.delta * cost_here;
            if (r1.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + nu) && std::abs(r2) <= 1e-13 * (1.0 + wn)) break;

            Eigen::MatrixXd J(m + 1, m + 1);
            J.topLeftCorner(m, m) = -gram;
            if (kind == "l2")
                J.topLeftCorner(m, m) -= (nu / fn) * (Eigen::MatrixXd::Identity(m, m) - d * d.transpose());
            J.topRightCorner(m, 1) = -d;
            J.bottomLeftCorner(1, m) = (-(w / wn).transpose() * A) - inst.delta * d.transpose();
            J(m, m) = 0.0;

            Eigen::VectorXd rhs(m + 1);
            rhs.head(m) = -r1;
            rhs[m] = -r2;
            const Eigen::VectorXd step = J.fullPivLu().solve(rhs);
            if (!step.allFinite()) return std::nullopt;
            f += step.head(m);
            nu += step[m];
            if (nu <= 0.0) return std::nullopt;
        }
        if (kind != "l2" && ((f.array() * signs.array()) < 0.0).any()) return std::nullopt;

        Eigen::VectorXd full = Eigen::VectorXd::Zero(inst.code_dim());
        for (Eigen::Index j = 0; j < m; ++j) full[support[static_cast<std::size_t>(j)]] = f[j];
        return full;
    }

    double solve_consistency(const Eigen::VectorXd& u0, const Eigen::VectorXd& u1,
                             const std::vector<Eigen::Index>& ranked, Eigen::Index m,
                             const Eigen::VectorXd& g_ref) const {
        const std::string kind = inst.cost->name();
        if (kind == "l2") {
            const double a = 1.0 - u1.squaredNorm();
            const double b = u0.dot(u1);
            const double c = u0.squaredNorm();
            if (a <= 0.0) return b > 0.0 ? c / (2.0 * b) : 0.0;
            const double disc = b * b + a * c;
            return (-b + std::sqrt(disc)) / a;
        }
        double s_u0 = 0.0, s_u1 = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double sign = kind == "l1_nonneg" ? 1.0 : (g_ref[ranked[static_cast<std::size_t>(j)]] >= 0.0 ? 1.0 : -1.0);
            s_u0 += sign * u0[j];
            s_u1 += sign * u1[j];
        }
        const double denom = 1.0 + s_u1;
        if (std::abs(denom) < 1e-12) return 0.0;
        const double theta = s_u0 / denom;
        return theta > 0.0 ? theta : 0.0;
    }

    double averaging_weight(int k) const {
        if (cfg.averaging == AveragingRule::harmonic_weights) return 2.0 / (k + 2.0);
        return cfg.fixed_weight;
    }
};

inline SolveResult solve_impl(const ProblemInstance& inst, const SolverConfig& cfg, bool eliminated) {
    const Eigen::Index n = inst.ambient_dim();
    const Eigen::Index K = inst.code_dim();
    SolveResult res;

    // zero-cost shortcut: the zero representation is optimal iff ||x|| <= eps
    if (inst.x.norm() <= inst.epsilon) {
        res.status = SolveStatus::zero_solution;
        res.primal.f = Eigen::VectorXd::Zero(K);
        res.primal.h = Eigen::VectorXd::Zero(K);
        res.primal.residual_norm = inst.x.norm();
        res.certificate.lambda = Eigen::VectorXd::Zero(n);
        res.primal_upper = 0.0;
        res.dual_lower = 0.0;
        res.lambda = Eigen::VectorXd::Zero(n);
        return res;
    }

    ImageProjection proj(inst.phi);
    if (inst.delta == 0.0) {
        const double resid = proj.residual(inst.x);
        if (classify_feasibility(inst, proj) == Feasibility::infeasible) {
            res.status = SolveStatus::infeasible;
            res.primal.cost_value = infinite_cost;
            res.primal.scale = infinite_cost;
            res.primal.f = Eigen::VectorXd::Zero(K);
            res.primal.h = Eigen::VectorXd::Zero(K);
            res.primal.residual_norm = resid;
            res.certificate.lambda = Eigen::VectorXd::Zero(n);
            res.primal_upper = infinite_cost;
            res.dual_lower = infinite_cost;
            res.lambda = Eigen::VectorXd::Zero(n);
            return res;
        }
        // tangency: the error ball touches image(phi) in a single point, the
        // dual supremum is not attained; solve the projected problem instead
        // of chasing a diverging ascent
        if (inst.epsilon > 0.0 && std::abs(resid - inst.epsilon) <= 1e-6 * (1.0 + inst.x.norm())) {
            ProblemInstance reduced(proj.project(inst.x), LinearOperator(inst.phi.matrix()), 0.0, 0.0,
                                    inst.cost);
            SolveResult rec = solve_impl(reduced, cfg, eliminated);
            rec.primal.residual_norm = (inst.x - inst.phi.apply(rec.primal.f)).norm();
            if (rec.certificate.lambda.size() == n && rec.certificate.lambda.norm() > 0.0) {
                rec.certificate.dual_gauge_norm = dual_gauge(rec.certificate.lambda, inst);
                rec.certificate.margin = margin(rec.certificate.lambda, inst);
            }
            rec.certificate.in_Lambda = false;
            rec.certificate.degenerate = true;
            if (rec.status == SolveStatus::converged) rec.status = SolveStatus::degenerate;
            return rec;
        }
    }

    SaddleLoop loop(inst, cfg, eliminated);
    Rng rng(cfg.seed);

    // strictly feasible start: margin(lambda0) = ||x|| - eps > 0
    loop.lambda = inst.x / inst.x.norm();
    loop.h = inst.cost->lmo(rng.normal_vector(K));
    loop.phi_h = inst.phi.apply(loop.h);
    loop.update_dual_from(loop.lambda);

    const int refit_every = K <= 4 ? 1 : 10;
    bool converged = false;
    int k = 0;
    for (; k < cfg.max_iter; ++k) {
        const double eta_scalar = eliminated ? std::sqrt(loop.margin_of(loop.lambda)) : 0.0;
        loop.ascent_step(eta_scalar);
        loop.update_dual_from(loop.lambda);

        const Eigen::VectorXd atom = inst.cost->lmo(inst.phi.adjoint_apply(loop.lambda));
        const double gamma = loop.averaging_weight(k);
        loop.h = (1.0 - gamma) * loop.h + gamma * atom;
        loop.phi_h = (1.0 - gamma) * loop.phi_h + gamma * inst.phi.apply(atom);
        if ((k & 511) == 511) loop.phi_h = inst.phi.apply(loop.h);

        loop.consider_direction(loop.h);
        if (k % refit_every == 0 || k + 1 == cfg.max_iter) loop.refit_pass();

        const double m_now = loop.margin_of(loop.lambda);
        const double obj_now = eliminated ? loop.objective_elim(loop.lambda, m_now, std::sqrt(m_now))
                                          : loop.objective_power(loop.lambda, m_now);
        const double gap = is_infinite(loop.best_theta) ? infinite_cost : loop.best_theta - loop.best_dual;
        if (cfg.record_trace)
            loop.trace.push_back({k, m_now, obj_now, loop.best_theta, loop.best_dual, gap});
        if (cfg.observer)
            cfg.observer(SaddleState{k, loop.lambda, loop.h, m_now, obj_now, loop.best_theta, loop.best_dir,
                                     loop.best_dual});
        if (gap <= cfg.tol) {
            converged = true;
            ++k;
            break;
        }
    }

    if (converged && !is_infinite(loop.best_theta)) {
        // primal-dual polish: alternate the closed-form dual with the
        // support refit, then pin the primal by a Newton solve of the
        // stationarity system on the identified support
        Eigen::VectorXd prev = loop.best_f;
        for (int round = 0; round < 4; ++round) {
            std::optional<DualCertificate> cert;
            if (loop.exact_path) {
                cert = interpolation_dual(inst, loop.best_f);
            } else {
                DualCertificate c = extract_dual(inst, loop.best_f);
                if (!c.degenerate && c.lambda.allFinite()) cert = std::move(c);
            }
            if (!cert) break;
            loop.offer_dual(*cert);
            loop.polish_ties = true;
            loop.refit_pass(&cert->lambda);
            loop.polish_ties = false;
            if ((loop.best_f - prev).norm() <= 1e-13 * (1.0 + prev.norm())) break;
            prev = loop.best_f;
        }
        if (!loop.exact_path) {
            std::vector<Eigen::Index> support;
            if (inst.cost->name() == "l2") {
                for (Eigen::Index i = 0; i < K; ++i) support.push_back(i);
            } else {
                const double fmax = loop.best_f.cwiseAbs().maxCoeff();
                for (Eigen::Index i = 0; i < K; ++i)
                    if (std::abs(loop.best_f[i]) > 1e-9 * std::max(fmax, 1e-30)) support.push_back(i);
            }
            if (auto pinned = loop.newton_polish(support, loop.best_f)) {
                loop.polish_ties = true;
                const double c = inst.cost->evaluate(*pinned);
                if (!is_infinite(c) && c > 1e-14) loop.consider_direction(*pinned / std::pow(c, 1.0 / loop.p));
                loop.polish_ties = false;
            }
        }

        // saddle refinement: ascend against the recovered optimal atom so the
        // reported lambda lands on the saddle point itself
        loop.phi_h = inst.phi.apply(loop.best_dir);
        for (int j = 0; j < 2000; ++j) {
            const double m = loop.margin_of(loop.lambda);
            const Eigen::VectorXd g = loop.gradient(loop.lambda, m, eliminated ? std::sqrt(m) : 0.0);
            if (g.norm() <= 1e-8 * (1.0 + loop.lambda.norm())) break;
            if (!loop.ascent_step(eliminated ? std::sqrt(m) : 0.0)) break;
        }
        loop.update_dual_from(loop.lambda);
    }

    res.status = converged ? SolveStatus::converged : SolveStatus::budget_exceeded;
    res.iterations = k;
    res.primal_upper = loop.best_theta;
    res.dual_lower = loop.best_dual;
    res.lambda = loop.lambda;
    res.trace = std::move(loop.trace);

    if (!is_infinite(loop.best_theta)) {
        res.primal.scale = loop.best_theta;
        res.primal.cost_value = std::pow(loop.best_theta, loop.p);
        res.primal.f = loop.best_f;
        res.primal.h = loop.best_dir;
        res.primal.residual_norm = (inst.x - inst.phi.apply(loop.best_f)).norm();
    } else {
        res.primal.cost_value = infinite_cost;
        res.primal.scale = infinite_cost;
        res.primal.f = Eigen::VectorXd::Zero(K);
        res.primal.h = Eigen::VectorXd::Zero(K);
        res.primal.residual_norm = inst.x.norm();
    }

    if (loop.exact_path) {
        // x sits exactly on the scaled atomic set; the residual-based dual
        // formula degenerates, so certify with the best normalized dual seen
        if (loop.best_dual_cert.lambda.size() == n) {
            res.certificate = loop.best_dual_cert;
            res.certificate.dual_gauge_norm = dual_gauge(res.certificate.lambda, inst);
            res.certificate.in_Lambda =
                converged && res.certificate.margin > 0.0 &&
                std::abs(res.certificate.margin - loop.best_theta) <=
                    std::max(1e-7, 10.0 * cfg.tol) * (1.0 + loop.best_theta);
        } else {
            res.certificate.lambda = Eigen::VectorXd::Zero(n);
        }
    } else if (!is_infinite(loop.best_theta)) {
        res.certificate = extract_dual(inst, res.primal.f);
    } else {
        res.certificate.lambda = Eigen::VectorXd::Zero(n);
    }
    return res;
}

} // namespace detail

/// Ascent-descent solver for the min-max reformulation of the inverse
/// problem. Returns the optimal cost, a primal witness recovered through the
/// exact scaling eta, and the dual certificate.
inline SolveResult solve(const ProblemInstance& inst, const SolverConfig& cfg = {}) {
    return detail::solve_impl(inst, cfg, false);
}

/// Variant that eliminates the positive-margin constraint through an
/// auxiliary scalar; only valid for costs of homogeneity order 1.
inline SolveResult solve_eliminated_form(const ProblemInstance& inst, const SolverConfig& cfg = {}) {
    detail::require(inst.cost->order() == 1.0, "solve_eliminated_form requires a cost of order p = 1");
    return detail::solve_impl(inst, cfg, true);
}

} // namespace lipdual
