#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invreg/numcore.hpp"
#include "invreg/problems.hpp"

namespace invreg {

enum class StopKind { discrepancy, apriori, max_iterations };

struct StoppingRule {
    StopKind kind = StopKind::discrepancy;
    double tau = 2.5;       // discrepancy factor, > 1
    double delta = 0.0;     // noise level
    double eta = 1.0;       // a-priori constant
    int apriori_case = 2;   // 1: delta/sqrt(alpha_k) <= eta, 2: eta alpha_k <= delta
    int max_iterations = 100000;

    static StoppingRule discrepancy_rule(double tau, double delta, int max_iter = 100000) {
        StoppingRule r;
        r.kind = StopKind::discrepancy;
        r.tau = tau;
        r.delta = delta;
        r.max_iterations = max_iter;
        r.validate();
        return r;
    }

    static StoppingRule max_iter_rule(int k) {
        StoppingRule r;
        r.kind = StopKind::max_iterations;
        r.max_iterations = k;
        return r;
    }

    void validate() const {
        if (kind == StopKind::discrepancy) {
            if (!(tau >= 1.0)) throw std::invalid_argument("StoppingRule: tau must be >= 1");
            if (delta < 0.0) throw std::invalid_argument("StoppingRule: delta must be >= 0");
        }
        if (max_iterations < 1) throw std::invalid_argument("StoppingRule: max_iterations must be >= 1");
    }
};

enum class StopReason { discrepancy, apriori, max_iterations, diverged, solver_failure };

struct IterationRecord {
    int k = 0;
    double residual = 0.0;
    double error = std::numeric_limits<double>::quiet_NaN();  // vs reference if supplied
    double step_value = 0.0;                                  // mu_k or alpha_k
    double halfstep_residual = std::numeric_limits<double>::quiet_NaN();
};

struct IterationLog {
    std::vector<IterationRecord> records;  // one per k = 0..k_star
    StopReason reason = StopReason::max_iterations;
    int stopping_index() const { return static_cast<int>(records.size()) - 1; }
};

enum class PriorMode { none, single, weighted_mean, cyclic, randomized, supervised };

struct DataDrivenPrior {
    PriorMode mode = PriorMode::none;
    Vec x0;                          // single
    std::vector<Vec> ensemble;       // weighted_mean / cyclic / randomized
    const ForwardProblem* learned = nullptr;  // supervised
    std::uint64_t seed = 7;          // randomized

    static DataDrivenPrior none_prior() { return {}; }
    static DataDrivenPrior single(Vec x0) {
        DataDrivenPrior p;
        p.mode = PriorMode::single;
        p.x0 = std::move(x0);
        return p;
    }
    static DataDrivenPrior weighted_mean(std::vector<Vec> u) {
        DataDrivenPrior p;
        p.mode = PriorMode::weighted_mean;
        p.ensemble = std::move(u);
        return p;
    }
    static DataDrivenPrior cyclic(std::vector<Vec> u) {
        DataDrivenPrior p;
        p.mode = PriorMode::cyclic;
        p.ensemble = std::move(u);
        return p;
    }
    static DataDrivenPrior randomized(std::vector<Vec> u, std::uint64_t seed) {
        DataDrivenPrior p;
        p.mode = PriorMode::randomized;
        p.ensemble = std::move(u);
        p.seed = seed;
        return p;
    }
    static DataDrivenPrior supervised(const ForwardProblem& learned) {
        DataDrivenPrior p;
        p.mode = PriorMode::supervised;
        p.learned = &learned;
        return p;
    }

    void validate() const {
        if ((mode == PriorMode::weighted_mean || mode == PriorMode::cyclic ||
             mode == PriorMode::randomized) &&
            ensemble.empty())
            throw std::invalid_argument("DataDrivenPrior: empty ensemble");
        if (mode == PriorMode::supervised && learned == nullptr)
            throw std::invalid_argument("DataDrivenPrior: missing learned operator");
    }
};

namespace detail {

struct IterationDriver {
    const ForwardProblem& problem;
    const Vec& ydelta;
    const StoppingRule& stop;
    const Vec* x_reference = nullptr;
    double divergence_factor = 1e6;

    IterationLog log;
    double initial_residual = -1.0;

    IterationDriver(const ForwardProblem& problem_, const Vec& ydelta_, const StoppingRule& stop_,
                    const Vec* x_reference_)
        : problem(problem_), ydelta(ydelta_), stop(stop_), x_reference(x_reference_) {}

    // records the state and decides whether to stop; returns true to stop
    bool observe(int k, const Vec& x, double residual, double step_value) {
        IterationRecord rec;
        rec.k = k;
        rec.residual = residual;
        rec.step_value = step_value;
        if (x_reference) rec.error = problem.param_norm(sub(x, *x_reference));
        log.records.push_back(rec);
        if (initial_residual < 0.0) initial_residual = residual;
        if (residual > divergence_factor * (initial_residual + 1e-300)) {
            log.reason = StopReason::diverged;
            return true;
        }
        if (stop.kind == StopKind::discrepancy && residual <= stop.tau * stop.delta) {
            log.reason = StopReason::discrepancy;
            return true;
        }
        if (k >= stop.max_iterations) {
            log.reason = StopReason::max_iterations;
            return true;
        }
        return false;
    }
};

}  // namespace detail

// Landweber iteration x_{k+1} = x_k - scale * F'[x_k]*(F[x_k] - ydelta) with
// domain projection, stopped by the discrepancy principle or max iterations.
// scale folds the operator normalization into the step (typically 1/||F'||^2).
inline std::pair<Vec, IterationLog> landweber(const ForwardProblem& problem, const Vec& ydelta,
                                              Vec x_start, const StoppingRule& stop,
                                              double scale = 1.0,
                                              const Vec* x_reference = nullptr) {
    stop.validate();
    if (!(scale > 0.0)) throw std::invalid_argument("landweber: scale must be > 0");
    detail::IterationDriver driver{problem, ydelta, stop, x_reference};
    Vec x = problem.project_domain(std::move(x_start));
    for (int k = 0;; ++k) {
        Vec residual_vec = sub(problem.apply(x), ydelta);
        double res = problem.data_norm(residual_vec);
        if (driver.observe(k, x, res, scale)) break;
        Vec grad = problem.deriv_adjoint(x, residual_vec);
        x = problem.project_domain(axpy(-scale, grad, x));
    }
    return {x, std::move(driver.log)};
}

// Modified Landweber: the adjoint step uses a surrogate G while the residual
// uses F; with G = F this reduces to landweber exactly.
inline std::pair<Vec, IterationLog> modified_landweber(const ForwardProblem& problem,
                                                       const ForwardProblem& surrogate,
                                                       const Vec& ydelta, Vec x_start,
                                                       const StoppingRule& stop,
                                                       double scale = 1.0,
                                                       const Vec* x_reference = nullptr) {
    stop.validate();
    detail::IterationDriver driver{problem, ydelta, stop, x_reference};
    Vec x = problem.project_domain(std::move(x_start));
    for (int k = 0;; ++k) {
        Vec residual_vec = sub(problem.apply(x), ydelta);
        double res = problem.data_norm(residual_vec);
        if (driver.observe(k, x, res, scale)) break;
        Vec grad = surrogate.deriv_adjoint(x, residual_vec);
        x = problem.project_domain(axpy(-scale, grad, x));
    }
    return {x, std::move(driver.log)};
}

inline void validate_alpha_schedule(const Vec& alphas, double ratio_bound) {
    if (alphas.empty()) throw std::invalid_argument("alpha schedule: empty");
    for (double a : alphas)
        if (!(a > 0.0)) throw std::invalid_argument("alpha schedule: entries must be > 0");
    for (std::size_t k = 0; k + 1 < alphas.size(); ++k) {
        double ratio = alphas[k] / alphas[k + 1];
        if (ratio < 1.0 - 1e-12 || ratio > ratio_bound + 1e-12)
            throw std::invalid_argument("alpha schedule: ratio alpha_k/alpha_{k+1} outside [1, r]");
    }
}

// Geometric default alpha_k = alpha0 * q^k (q in (0,1]).
inline Vec geometric_schedule(double alpha0, double q, int length) {
    if (!(alpha0 > 0.0) || !(q > 0.0) || q > 1.0 || length < 1)
        throw std::invalid_argument("geometric_schedule: bad parameters");
    Vec a(length);
    double v = alpha0;
    for (int k = 0; k < length; ++k, v *= q) a[k] = v;
    return a;
}

// A-priori stopping index: case 2 returns the first k with
// eta * alpha_k <= delta; case 1 the first k with delta / sqrt(alpha_k) <= eta.
inline int apriori_stop_index(const Vec& alpha_schedule, double delta, double eta, int rule_case) {
    if (!(delta > 0.0) || !(eta > 0.0))
        throw std::invalid_argument("apriori_stop_index: delta and eta must be > 0");
    if (rule_case != 1 && rule_case != 2)
        throw std::invalid_argument("apriori_stop_index: case must be 1 or 2");
    for (std::size_t k = 0; k < alpha_schedule.size(); ++k) {
        if (rule_case == 2 && eta * alpha_schedule[k] <= delta) return static_cast<int>(k);
        if (rule_case == 1 && delta / std::sqrt(alpha_schedule[k]) <= eta) return static_cast<int>(k);
    }
    throw std::runtime_error("apriori_stop_index: rule not satisfied within the schedule");
}

namespace detail {

// CG solve of (F'*F' + alpha I + mu Fl'*Fl') dx = rhs in the parameter inner
// product; the learned term is optional.
inline Vec regularized_normal_solve(const ForwardProblem& problem, const Vec& x, double alpha,
                                    const ForwardProblem* learned, double mu, const Vec& rhs,
                                    int max_iter, double tol) {
    auto normal_apply = [&](const Vec& v) {
        Vec out = problem.deriv_adjoint(x, problem.deriv(x, v));
        out = axpy(alpha, v, out);
        if (learned && mu != 0.0)
            out = axpy(mu, learned->deriv_adjoint(x, learned->deriv(x, v)), out);
        return out;
    };
    Vec sol(rhs.size(), 0.0);
    Vec r = rhs;
    Vec p = r;
    double rr = problem.param_inner(r, r);
    const double stop = tol * tol * std::max(rr, 1e-300);
    int it = 0;
    for (; it < max_iter && rr > stop; ++it) {
        Vec ap = normal_apply(p);
        double pap = problem.param_inner(p, ap);
        if (pap <= 0.0) throw std::runtime_error("normal solve: operator not positive definite");
        double step = rr / pap;
        sol = axpy(step, p, sol);
        r = axpy(-step, ap, r);
        double rr_new = problem.param_inner(r, r);
        p = axpy(rr_new / rr, p, r);
        rr = rr_new;
    }
    if (rr > stop && it >= max_iter)
        throw std::runtime_error("normal solve: conjugate gradients did not converge");
    return sol;
}

inline Vec prior_element(const DataDrivenPrior& prior, int k, SplitMix64& gen) {
    switch (prior.mode) {
        case PriorMode::single:
            return prior.x0;
        case PriorMode::weighted_mean: {
            Vec mean(prior.ensemble.front().size(), 0.0);
            for (const Vec& u : prior.ensemble) mean = add(mean, u);
            return scaled(mean, 1.0 / prior.ensemble.size());
        }
        case PriorMode::cyclic: {
            std::size_t n0 = prior.ensemble.size();
            return prior.ensemble[static_cast<std::size_t>(k) % n0];
        }
        case PriorMode::randomized: {
            std::size_t idx = gen.next_u64() % prior.ensemble.size();
            return prior.ensemble[idx];
        }
        default:
            throw std::logic_error("prior_element: mode has no element");
    }
}

}  // namespace detail

// Iteratively regularized Gauss-Newton iteration:
// x_{k+1} = x_k - (F'*F' + alpha_k I)^{-1} (F'*(F[x_k]-ydelta) + alpha_k (x_k - x0)).
// Stopping: discrepancy, the a-priori index rule, or max iterations.
inline std::pair<Vec, IterationLog> irgn(const ForwardProblem& problem, const Vec& ydelta,
                                         Vec x_start, const Vec& x0_prior,
                                         const Vec& alpha_schedule, const StoppingRule& stop,
                                         double ratio_bound = 10.0,
                                         const Vec* x_reference = nullptr) {
    stop.validate();
    validate_alpha_schedule(alpha_schedule, ratio_bound);
    detail::IterationDriver driver{problem, ydelta, stop, x_reference};
    Vec x = problem.project_domain(std::move(x_start));
    int kmax = std::min<int>(stop.max_iterations, static_cast<int>(alpha_schedule.size()));
    int apriori_k = -1;
    if (stop.kind == StopKind::apriori) {
        apriori_k = apriori_stop_index(alpha_schedule, stop.delta, stop.eta, stop.apriori_case);
        kmax = std::min(kmax, apriori_k);
    }
    for (int k = 0;; ++k) {
        Vec residual_vec = sub(problem.apply(x), ydelta);
        double res = problem.data_norm(residual_vec);
        double alpha_k = alpha_schedule[std::min<std::size_t>(k, alpha_schedule.size() - 1)];
        if (apriori_k >= 0 && k >= apriori_k) {
            driver.observe(k, x, res, alpha_k);
            driver.log.reason = StopReason::apriori;
            break;
        }
        if (driver.observe(k, x, res, alpha_k)) break;
        if (k >= kmax) {
            driver.log.reason = StopReason::max_iterations;
            break;
        }
        Vec grad = problem.deriv_adjoint(x, residual_vec);
        grad = axpy(alpha_k, sub(x, x0_prior), grad);
        Vec dx;
        try {
            dx = detail::regularized_normal_solve(problem, x, alpha_k, nullptr, 0.0,
                                                  scaled(grad, -1.0), 2000, 1e-12);
        } catch (const std::runtime_error&) {
            driver.log.reason = StopReason::solver_failure;
            break;
        }
        x = problem.project_domain(add(x, dx));
    }
    return {x, std::move(driver.log)};
}

// 2-step iteratively regularized Landweber: a gradient half step followed
// by a convex pull toward the prior.
inline std::pair<Vec, IterationLog> two_step_irli(const ForwardProblem& problem, const Vec& ydelta,
                                                  Vec x_start, const Vec& x0_prior,
                                                  const Vec& mu_schedule, const StoppingRule& stop,
                                                  double scale = 1.0,
                                                  const Vec* x_reference = nullptr) {
    stop.validate();
    for (double mu : mu_schedule)
        if (mu < 0.0 || mu > 1.0)
            throw std::invalid_argument("two_step_irli: mu must lie in [0,1]");
    detail::IterationDriver driver{problem, ydelta, stop, x_reference};
    Vec x = problem.project_domain(std::move(x_start));
    for (int k = 0;; ++k) {
        Vec residual_vec = sub(problem.apply(x), ydelta);
        double res = problem.data_norm(residual_vec);
        double mu_k = mu_schedule.empty()
                          ? 0.0
                          : mu_schedule[std::min<std::size_t>(k, mu_schedule.size() - 1)];
        if (driver.observe(k, x, res, mu_k)) break;
        Vec half = problem.project_domain(
            axpy(-scale, problem.deriv_adjoint(x, residual_vec), x));
        driver.log.records.back().halfstep_residual =
            problem.data_norm(sub(problem.apply(half), ydelta));
        x = problem.project_domain(add(scaled(half, 1.0 - mu_k), scaled(x0_prior, mu_k)));
    }
    return {x, std::move(driver.log)};
}

// Data-driven IRLI variants (weighted-mean, cyclic, randomized, supervised;
// optional 2-step forms): x_{k+1} = x_k - scale F'*(F-ydelta) - mu_k P_k
// with P_k the prior pull of the selected mode.
inline std::pair<Vec, IterationLog> irli_variant(const ForwardProblem& problem, const Vec& ydelta,
                                                 Vec x_start, const DataDrivenPrior& prior,
                                                 const Vec& mu_schedule, const StoppingRule& stop,
                                                 bool two_step = false, double scale = 1.0,
                                                 const Vec* x_reference = nullptr) {
    stop.validate();
    prior.validate();
    detail::IterationDriver driver{problem, ydelta, stop, x_reference};
    SplitMix64 gen(prior.seed);
    Vec x = problem.project_domain(std::move(x_start));
    for (int k = 0;; ++k) {
        Vec residual_vec = sub(problem.apply(x), ydelta);
        double res = problem.data_norm(residual_vec);
        double mu_k = mu_schedule.empty()
                          ? 0.0
                          : mu_schedule[std::min<std::size_t>(k, mu_schedule.size() - 1)];
        if (driver.observe(k, x, res, mu_k)) break;
        Vec base = axpy(-scale, problem.deriv_adjoint(x, residual_vec), x);
        const Vec& eval_point = two_step ? base : x;
        Vec pull(x.size(), 0.0);
        if (prior.mode == PriorMode::supervised) {
            Vec lr = sub(prior.learned->apply(eval_point), ydelta);
            pull = prior.learned->deriv_adjoint(eval_point, lr);
        } else if (prior.mode != PriorMode::none) {
            pull = sub(eval_point, detail::prior_element(prior, k, gen));
        }
        x = problem.project_domain(axpy(-mu_k, pull, base));
    }
    return {x, std::move(driver.log)};
}

// Data-driven IRGN variants: the prior element replaces x0 in the IRGN
// update; supervised mode uses (F'*F' + mu_k Fl'*Fl')^{-1} applied to the
// summed gradients. 2-step forms split the prior pull off the Newton step.
inline std::pair<Vec, IterationLog> irgn_variant(const ForwardProblem& problem, const Vec& ydelta,
                                                 Vec x_start, const DataDrivenPrior& prior,
                                                 const Vec& alpha_schedule, const StoppingRule& stop,
                                                 bool two_step = false, double ratio_bound = 10.0,
                                                 const Vec* x_reference = nullptr) {
    stop.validate();
    prior.validate();
    validate_alpha_schedule(alpha_schedule, ratio_bound);
    detail::IterationDriver driver{problem, ydelta, stop, x_reference};
    SplitMix64 gen(prior.seed);
    Vec x = problem.project_domain(std::move(x_start));
    int kmax = std::min<int>(stop.max_iterations, static_cast<int>(alpha_schedule.size()));
    int apriori_k = -1;
    if (stop.kind == StopKind::apriori) {
        apriori_k = apriori_stop_index(alpha_schedule, stop.delta, stop.eta, stop.apriori_case);
        kmax = std::min(kmax, apriori_k);
    }
    for (int k = 0;; ++k) {
        Vec residual_vec = sub(problem.apply(x), ydelta);
        double res = problem.data_norm(residual_vec);
        double alpha_k = alpha_schedule[std::min<std::size_t>(k, alpha_schedule.size() - 1)];
        if (apriori_k >= 0 && k >= apriori_k) {
            driver.observe(k, x, res, alpha_k);
            driver.log.reason = StopReason::apriori;
            break;
        }
        if (driver.observe(k, x, res, alpha_k)) break;
        if (k >= kmax) {
            driver.log.reason = StopReason::max_iterations;
            break;
        }
        try {
            Vec grad = problem.deriv_adjoint(x, residual_vec);
            if (prior.mode == PriorMode::supervised) {
                Vec lr = sub(prior.learned->apply(x), ydelta);
                Vec lgrad = prior.learned->deriv_adjoint(x, lr);
                if (two_step) {
                    Vec half = add(x, detail::regularized_normal_solve(
                                          problem, x, 0.0, prior.learned, alpha_k,
                                          scaled(grad, -1.0), 2000, 1e-12));
                    Vec lr2 = sub(prior.learned->apply(half), ydelta);
                    Vec lgrad2 = prior.learned->deriv_adjoint(half, lr2);
                    Vec pull = detail::regularized_normal_solve(problem, x, 0.0, prior.learned,
                                                                alpha_k, lgrad2, 2000, 1e-12);
                    x = problem.project_domain(axpy(-alpha_k, pull, half));
                } else {
                    Vec rhs = axpy(alpha_k, lgrad, grad);
                    Vec dx = detail::regularized_normal_solve(problem, x, 0.0, prior.learned,
                                                              alpha_k, scaled(rhs, -1.0), 2000,
                                                              1e-12);
                    x = problem.project_domain(add(x, dx));
                }
            } else {
                Vec anchor = prior.mode == PriorMode::none
                                 ? Vec(x.size(), 0.0)
                                 : detail::prior_element(prior, k, gen);
                if (two_step) {
                    Vec half = add(x, detail::regularized_normal_solve(problem, x, alpha_k,
                                                                       nullptr, 0.0,
                                                                       scaled(grad, -1.0), 2000,
                                                                       1e-12));
                    Vec pull = detail::regularized_normal_solve(problem, x, alpha_k, nullptr, 0.0,
                                                                sub(half, anchor), 2000, 1e-12);
                    x = problem.project_domain(axpy(-alpha_k, pull, half));
                } else {
                    Vec rhs = axpy(alpha_k, sub(x, anchor), grad);
                    Vec dx = detail::regularized_normal_solve(problem, x, alpha_k, nullptr, 0.0,
                                                              scaled(rhs, -1.0), 2000, 1e-12);
                    x = problem.project_domain(add(x, dx));
                }
            }
        } catch (const std::runtime_error&) {
            driver.log.reason = StopReason::solver_failure;
            break;
        }
    }
    return {x, std::move(driver.log)};
}

// Measured tangential-cone ratio: the maximum of
// ||F[x]-F[xt]-F'[x](x-xt)|| / ||F[x]-F[xt]|| over the supplied pairs.
inline double measure_eta_cone(const ForwardProblem& problem,
                               const std::vector<std::pair<Vec, Vec>>& pairs) {
    double worst = 0.0;
    for (const auto& [x, xt] : pairs) {
        Vec fx = problem.apply(x);
        Vec fxt = problem.apply(xt);
        Vec lin = problem.deriv(x, sub(x, xt));
        Vec num = sub(sub(fx, fxt), lin);
        double den = problem.data_norm(sub(fx, fxt));
        if (den <= 1e-14) continue;
        worst = std::max(worst, problem.data_norm(num) / den);
    }
    return worst;
}

// Upper bound for the Landweber discrepancy stopping index under the
// tangential-cone condition, with measured constants:
// k_*(tau delta)^2 <= tau / ((1-2 eta) tau - 2 (1+eta)) * ||x0 - x*||^2.
// Returns +inf when the denominator is not positive (bound vacuous).
inline double landweber_stop_bound(double tau, double eta_cone, double initial_error_sq) {
    double denom = (1.0 - 2.0 * eta_cone) * tau - 2.0 * (1.0 + eta_cone);
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return tau / denom * initial_error_sq;
}

}  // namespace invreg
