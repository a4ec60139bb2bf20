#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invreg/numcore.hpp"
#include "invreg/problems.hpp"

namespace invreg {

struct TikhonovConfig {
    double alpha = 1e-2;
    Vec x0_prior;
    int max_iterations = 80;
    double grad_tolerance = 1e-10;  // relative to 1 + initial objective
    int multistarts = 4;
    double multistart_spread = -1.0;  // < 0: default 0.1*||x0|| + 0.01
    std::uint64_t seed = 2024;
    int cg_max_iterations = 400;
    double cg_tolerance = 1e-12;

    void validate() const {
        if (!(alpha > 0.0)) throw std::invalid_argument("TikhonovConfig: alpha must be > 0");
        if (!(grad_tolerance > 0.0)) throw std::invalid_argument("TikhonovConfig: tolerance must be > 0");
        if (multistarts < 1) throw std::invalid_argument("TikhonovConfig: multistarts must be >= 1");
    }
};

enum class PriorKind { surrogate, feature };

struct HybridConfig {
    double alpha = 1e-2;
    double lambda = -1.0;  // < 0: surrogate couples lambda = alpha, feature fixes lambda = 1
    PriorKind kind = PriorKind::surrogate;
    TikhonovConfig solver;

    double effective_lambda() const {
        if (lambda >= 0.0) return lambda;
        return kind == PriorKind::surrogate ? alpha : 1.0;
    }
};

struct MinimizeReport {
    int iterations = 0;
    double objective = std::numeric_limits<double>::infinity();
    double grad_norm = std::numeric_limits<double>::infinity();
    double achieved_eta = 0.0;   // objective gap against the best multistart
    int winning_start = -1;
    bool converged = false;
    bool hit_max_iterations = false;
    bool line_search_failed = false;
};

inline double tikhonov_objective(const ForwardProblem& problem, const Vec& x, const Vec& ydelta,
                                 const TikhonovConfig& cfg) {
    cfg.validate();
    Vec r = sub(problem.apply(x), ydelta);
    Vec d = sub(x, cfg.x0_prior);
    return problem.data_inner(r, r) + cfg.alpha * problem.param_inner(d, d);
}

namespace detail {

// One stacked-residual term: weight * (op[x] - target), with op supplying the
// derivative machinery; the plain Tikhonov fit term, the hybrid prior term,
// and the regularizer all take this shape.
struct ResidualTerm {
    const ForwardProblem* op = nullptr;  // nullptr: identity (regularizer term)
    Vec target;
    double weight = 1.0;  // multiplies the squared norm
};

struct GaussNewtonProblem {
    const ForwardProblem* primary;  // domain projection + param inner product
    std::vector<ResidualTerm> terms;

    double objective(const Vec& x) const {
        double total = 0.0;
        for (const auto& term : terms) {
            if (term.op) {
                Vec r = sub(term.op->apply(x), term.target);
                total += term.weight * term.op->data_inner(r, r);
            } else {
                Vec r = sub(x, term.target);
                total += term.weight * primary->param_inner(r, r);
            }
        }
        return total;
    }

    // gradient of the objective with respect to the parameter inner product
    // (without the factor 2)
    Vec half_gradient(const Vec& x) const {
        Vec g(primary->param_dim(), 0.0);
        for (const auto& term : terms) {
            if (term.op) {
                Vec r = sub(term.op->apply(x), term.target);
                g = axpy(term.weight, term.op->deriv_adjoint(x, r), g);
            } else {
                g = axpy(term.weight, sub(x, term.target), g);
            }
        }
        return g;
    }

    // v -> sum_i weight_i J_i* J_i v  (Gauss-Newton normal operator)
    Vec normal_apply(const Vec& x, const Vec& v) const {
        Vec out(primary->param_dim(), 0.0);
        for (const auto& term : terms) {
            if (term.op) {
                out = axpy(term.weight, term.op->deriv_adjoint(x, term.op->deriv(x, v)), out);
            } else {
                out = axpy(term.weight, v, out);
            }
        }
        return out;
    }
};

// Conjugate gradients on the SPD normal operator in the problem's parameter
// inner product.
inline Vec solve_normal_cg(const GaussNewtonProblem& gn, const Vec& x, const Vec& rhs,
                           int max_iter, double tol) {
    Vec sol(rhs.size(), 0.0);
    Vec r = rhs;
    Vec p = r;
    double rr = gn.primary->param_inner(r, r);
    const double stop = tol * tol * std::max(rr, 1e-300);
    for (int it = 0; it < max_iter && rr > stop; ++it) {
        Vec ap = gn.normal_apply(x, p);
        double pap = gn.primary->param_inner(p, ap);
        if (pap <= 0.0) break;
        double step = rr / pap;
        sol = axpy(step, p, sol);
        r = axpy(-step, ap, r);
        double rr_new = gn.primary->param_inner(r, r);
        p = axpy(rr_new / rr, p, r);
        rr = rr_new;
    }
    return sol;
}

struct GnRunResult {
    Vec x;
    MinimizeReport report;
};

inline GnRunResult gauss_newton_descend(const GaussNewtonProblem& gn, Vec x,
                                        const TikhonovConfig& cfg) {
    const ForwardProblem& prob = *gn.primary;
    x = prob.project_domain(std::move(x));
    GnRunResult out;
    double obj;
    try {
        obj = gn.objective(x);
    } catch (const std::domain_error&) {
        // infeasible start (e.g. a multistart perturbation in a subspace the
        // projection cannot reach); report a failed run instead of throwing
        out.x = std::move(x);
        out.report.line_search_failed = true;
        return out;
    }
    const double grad_stop = cfg.grad_tolerance * (1.0 + obj);
    MinimizeReport rep;
    rep.objective = obj;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        Vec g = gn.half_gradient(x);
        // projected-gradient stationarity measure
        Vec pg = sub(x, prob.project_domain(sub(x, g)));
        rep.grad_norm = prob.param_norm(pg);
        rep.iterations = it;
        if (rep.grad_norm <= grad_stop) {
            rep.converged = true;
            break;
        }
        Vec step = solve_normal_cg(gn, x, scaled(g, -1.0), cfg.cg_max_iterations, cfg.cg_tolerance);
        double slope = prob.param_inner(g, step);
        if (slope >= 0.0) step = scaled(g, -1.0), slope = -prob.param_inner(g, g);
        double t = 1.0;
        bool accepted = false;
        for (int back = 0; back < 40; ++back, t *= 0.5) {
            Vec cand = prob.project_domain(axpy(t, step, x));
            double cand_obj;
            try {
                cand_obj = gn.objective(cand);
            } catch (const std::domain_error&) {
                continue;
            }
            if (cand_obj <= obj + 1e-4 * t * 2.0 * slope || cand_obj < obj * (1.0 - 1e-15)) {
                x = std::move(cand);
                obj = cand_obj;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            rep.line_search_failed = true;
            break;
        }
        rep.objective = obj;
    }
    if (!rep.converged && !rep.line_search_failed) rep.hit_max_iterations = true;
    Vec g = gn.half_gradient(x);
    Vec pg = sub(x, prob.project_domain(sub(x, g)));
    rep.grad_norm = prob.param_norm(pg);
    rep.objective = obj;
    out.x = std::move(x);
    out.report = rep;
    return out;
}

inline std::pair<Vec, MinimizeReport> multistart_minimize(const GaussNewtonProblem& gn,
                                                          const TikhonovConfig& cfg) {
    cfg.validate();
    const ForwardProblem& prob = *gn.primary;
    double spread = cfg.multistart_spread >= 0.0
                        ? cfg.multistart_spread
                        : 0.1 * prob.param_norm(cfg.x0_prior) + 0.01;
    SplitMix64 gen(cfg.seed);
    std::vector<GnRunResult> runs;
    for (int s = 0; s < cfg.multistarts; ++s) {
        Vec start = cfg.x0_prior;
        if (s > 0) {
            Vec dir = gen.symmetric_vector(start.size());
            double nrm = prob.param_norm(dir);
            if (nrm > 1e-14) start = axpy(spread / nrm, dir, start);
        }
        runs.push_back(gauss_newton_descend(gn, std::move(start), cfg));
    }
    int best = 0;
    for (int s = 1; s < static_cast<int>(runs.size()); ++s)
        if (runs[s].report.objective < runs[best].report.objective) best = s;
    bool all_failed = true;
    for (auto& r : runs) all_failed = all_failed && r.report.line_search_failed;
    MinimizeReport rep = runs[best].report;
    rep.winning_start = best;
    rep.achieved_eta = 0.0;
    for (auto& r : runs)
        rep.achieved_eta = std::max(rep.achieved_eta, rep.objective - r.report.objective);
    rep.achieved_eta = std::max(rep.achieved_eta, 0.0);
    rep.line_search_failed = all_failed;
    return {runs[best].x, rep};
}

}  // namespace detail

// eta-approximate minimizer of ||F[x]-ydelta||^2 + alpha ||x - x0||^2 by
// multistart damped Gauss-Newton with nodewise domain projection.
inline std::pair<Vec, MinimizeReport> tikhonov_minimize(const ForwardProblem& problem,
                                                        const Vec& ydelta,
                                                        const TikhonovConfig& cfg) {
    cfg.validate();
    if (cfg.x0_prior.size() != problem.param_dim())
        throw std::invalid_argument("tikhonov_minimize: x0_prior has wrong size");
    detail::GaussNewtonProblem gn;
    gn.primary = &problem;
    gn.terms.push_back({&problem, ydelta, 1.0});
    gn.terms.push_back({nullptr, cfg.x0_prior, cfg.alpha});
    return detail::multistart_minimize(gn, cfg);
}

// Minimizes the hybrid functional
//   ||F[x]-ydelta||^2 + lambda ||Fl[x]-prior_data||^2 + alpha ||x-x0||^2,
// where prior_data is ydelta again in surrogate mode and the feature data in
// feature mode.
inline std::pair<Vec, MinimizeReport> hybrid_minimize(const ForwardProblem& problem,
                                                      const ForwardProblem& learned,
                                                      const Vec& ydelta, const Vec& prior_data,
                                                      const HybridConfig& hybrid) {
    TikhonovConfig cfg = hybrid.solver;
    cfg.alpha = hybrid.alpha;
    cfg.validate();
    if (cfg.x0_prior.size() != problem.param_dim())
        throw std::invalid_argument("hybrid_minimize: x0_prior has wrong size");
    detail::GaussNewtonProblem gn;
    gn.primary = &problem;
    gn.terms.push_back({&problem, ydelta, 1.0});
    const double lambda = hybrid.effective_lambda();
    if (lambda > 0.0) gn.terms.push_back({&learned, prior_data, lambda});
    gn.terms.push_back({nullptr, cfg.x0_prior, hybrid.alpha});
    return detail::multistart_minimize(gn, cfg);
}

namespace detail {

// Problem restricted to span(Q c): apply = F(Q c), Euclidean coefficient
// space; Q has X-orthonormal columns.
class SubspaceProblem : public ForwardProblem {
public:
    SubspaceProblem(const ForwardProblem& base, std::vector<Vec> basis)
        : base_(base), basis_(std::move(basis)) {}

    std::size_t param_dim() const override { return basis_.size(); }
    std::size_t data_dim() const override { return base_.data_dim(); }

    Vec expand(const Vec& c) const {
        Vec x(base_.param_dim(), 0.0);
        for (std::size_t j = 0; j < basis_.size(); ++j) x = axpy(c[j], basis_[j], x);
        return x;
    }

    Vec restrict_adjoint(const Vec& g) const {
        Vec c(basis_.size());
        for (std::size_t j = 0; j < basis_.size(); ++j) c[j] = base_.param_inner(basis_[j], g);
        return c;
    }

    Vec apply(const Vec& c) const override { return base_.apply(expand(c)); }
    Vec deriv(const Vec& c, const Vec& h) const override {
        return base_.deriv(expand(c), expand(h));
    }
    Vec deriv_adjoint(const Vec& c, const Vec& w) const override {
        return restrict_adjoint(base_.deriv_adjoint(expand(c), w));
    }
    double data_inner(const Vec& a, const Vec& b) const override { return base_.data_inner(a, b); }

private:
    const ForwardProblem& base_;
    std::vector<Vec> basis_;
};

}  // namespace detail

// Tikhonov minimization over span(basis): the coefficient problem is solved
// with the same Gauss-Newton machinery after orthonormalizing the basis in
// the parameter inner product. Throws on rank-deficient bases.
inline std::pair<Vec, MinimizeReport> finite_dim_tikhonov(const ForwardProblem& problem,
                                                          const std::vector<Vec>& subspace_basis,
                                                          const Vec& ydelta,
                                                          const TikhonovConfig& cfg) {
    cfg.validate();
    if (subspace_basis.empty()) throw std::invalid_argument("finite_dim_tikhonov: empty basis");
    std::vector<Vec> q;
    for (const Vec& b : subspace_basis) {
        Vec v = b;
        for (const Vec& prev : q) v = axpy(-problem.param_inner(prev, v), prev, v);
        double nrm = problem.param_norm(v);
        if (nrm <= 1e-12 * (problem.param_norm(b) + 1e-30))
            throw std::invalid_argument("finite_dim_tikhonov: basis is rank deficient");
        q.push_back(scaled(v, 1.0 / nrm));
    }
    detail::SubspaceProblem subprob(problem, q);
    // ||Qc - x0||^2 = ||c - c0||^2 + ||x0_perp||^2
    Vec c0(q.size());
    Vec x0_proj(problem.param_dim(), 0.0);
    for (std::size_t j = 0; j < q.size(); ++j) {
        c0[j] = problem.param_inner(q[j], cfg.x0_prior);
        x0_proj = axpy(c0[j], q[j], x0_proj);
    }
    Vec x0_perp = sub(cfg.x0_prior, x0_proj);
    double offset = cfg.alpha * problem.param_inner(x0_perp, x0_perp);

    TikhonovConfig sub_cfg = cfg;
    sub_cfg.x0_prior = c0;
    auto [c, rep] = tikhonov_minimize(subprob, ydelta, sub_cfg);
    rep.objective += offset;
    return {subprob.expand(c), rep};
}

// x0 = x_true - z * y[x_true]; by the c-example source-condition equivalence
// the pair (x_true, x0) then satisfies the variational source condition when
// z is smooth, small, and vanishes at the boundary.
inline Vec construct_source_prior(const CExampleProblem& problem, const Vec& x_true,
                                  const GridFunction1D& z_profile) {
    if (x_true.size() != problem.param_dim())
        throw std::invalid_argument("construct_source_prior: x_true has wrong size");
    if (z_profile.n != problem.resolution())
        throw std::invalid_argument("construct_source_prior: z must live on the FEM grid");
    if (std::fabs(z_profile.values.front()) > 1e-12 || std::fabs(z_profile.values.back()) > 1e-12)
        throw std::invalid_argument("construct_source_prior: z must vanish at the boundary");
    Vec y = problem.apply(x_true);
    Vec x0(x_true.size());
    for (std::size_t i = 0; i < x0.size(); ++i) x0[i] = x_true[i] - z_profile.values[i] * y[i];
    return x0;
}

}  // namespace invreg
