#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invreg/iterative.hpp"
#include "invreg/linalg.hpp"
#include "invreg/numcore.hpp"

namespace invreg {

// Activation catalog; each entry supplies value and, where defined, first and
// second derivatives. Piecewise-linear kinds return the subgradient value 0
// at their kinks and reject order 2.
struct Activation {
    enum class Kind {
        sigmoid,      // logistic 1/(1+exp(-(a s + b)))
        tanh_fn,
        relu,         // max(0, a s + b)
        relu_pow,     // max(0, s)^k
        relu6,
        leaky_relu,   // slope a on the negative side
        hard_swish,
        log_sigmoid,
        softplus,
        elu,          // shape a
        celu,         // shape a
        selu,
        hard_shrink,  // threshold c = a
        soft_shrink,  // threshold lambda = a
        hard_sigmoid, // threshold c = a
        gaussian,     // exp(-(s-b)^2 / (2 a^2))
        heaviside,    // indicator of a s + b > 0
        linear        // a s + b
    };

    Kind kind = Kind::tanh_fn;
    double a = 1.0;
    double b = 0.0;
    int power = 2;  // relu_pow exponent

    static Activation make(Kind k, double a_ = 1.0, double b_ = 0.0, int power_ = 2) {
        Activation act;
        act.kind = k;
        act.a = a_;
        act.b = b_;
        act.power = power_;
        return act;
    }
    static Activation tanh_act() { return make(Kind::tanh_fn); }
    static Activation logistic(double a_ = 1.0, double b_ = 0.0) {
        return make(Kind::sigmoid, a_, b_);
    }
    static Activation softplus_act() { return make(Kind::softplus); }
    static Activation relu_act(double a_ = 1.0, double b_ = 0.0) { return make(Kind::relu, a_, b_); }
    static Activation gaussian_act(double a_, double b_) { return make(Kind::gaussian, a_, b_); }
    static Activation linear_act(double a_, double b_) { return make(Kind::linear, a_, b_); }
};

inline double activation_eval(const Activation& act, double s, int order = 0) {
    if (order < 0 || order > 2) throw std::invalid_argument("activation_eval: order must be 0, 1, 2");
    using K = Activation::Kind;
    auto reject2 = [&]() {
        if (order == 2)
            throw std::invalid_argument("activation_eval: second derivative undefined for this kind");
    };
    switch (act.kind) {
        case K::sigmoid: {
            double e = 1.0 / (1.0 + std::exp(-(act.a * s + act.b)));
            if (order == 0) return e;
            if (order == 1) return act.a * e * (1.0 - e);
            return act.a * act.a * e * (1.0 - e) * (1.0 - 2.0 * e);
        }
        case K::tanh_fn: {
            double t = std::tanh(s);
            if (order == 0) return t;
            if (order == 1) return 1.0 - t * t;
            return -2.0 * t * (1.0 - t * t);
        }
        case K::relu: {
            reject2();
            double u = act.a * s + act.b;
            if (order == 0) return u > 0.0 ? u : 0.0;
            return u > 0.0 ? act.a : 0.0;
        }
        case K::relu_pow: {
            int k = act.power;
            if (k < 1) throw std::invalid_argument("activation_eval: relu_pow needs k >= 1");
            if (order == 1 && k == 1) { reject2(); return s > 0.0 ? 1.0 : 0.0; }
            if (order > k) reject2();
            double sp = s > 0.0 ? s : 0.0;
            if (order == 0) return std::pow(sp, k);
            if (order == 1) return k * std::pow(sp, k - 1);
            if (k < 2) throw std::invalid_argument("activation_eval: relu_pow order too high");
            return static_cast<double>(k) * (k - 1) * std::pow(sp, k - 2);
        }
        case K::relu6: {
            reject2();
            if (order == 0) return std::min(std::max(0.0, s), 6.0);
            return (s > 0.0 && s < 6.0) ? 1.0 : 0.0;
        }
        case K::leaky_relu: {
            reject2();
            if (order == 0) return s > 0.0 ? s : act.a * s;
            return s > 0.0 ? 1.0 : act.a;
        }
        case K::hard_swish: {
            double r6 = std::min(std::max(0.0, s + 3.0), 6.0);
            if (order == 0) return s * r6 / 6.0;
            double dr6 = (s + 3.0 > 0.0 && s + 3.0 < 6.0) ? 1.0 : 0.0;
            if (order == 1) return (r6 + s * dr6) / 6.0;
            return 2.0 * dr6 / 6.0;
        }
        case K::log_sigmoid: {
            // log(1/(1+e^-s)) = -softplus(-s)
            if (order == 0) return -std::log1p(std::exp(-s));
            double e = 1.0 / (1.0 + std::exp(s));
            if (order == 1) return e;
            return -e * (1.0 - e);
        }
        case K::softplus: {
            if (order == 0) return std::log1p(std::exp(s));
            double e = 1.0 / (1.0 + std::exp(-s));
            if (order == 1) return e;
            return e * (1.0 - e);
        }
        case K::elu: {
            if (s >= 0.0) return order == 0 ? s : (order == 1 ? 1.0 : 0.0);
            double es = std::exp(s);
            return order == 0 ? act.a * (es - 1.0) : act.a * es;
        }
        case K::celu: {
            if (act.a == 0.0) throw std::invalid_argument("activation_eval: celu needs a != 0");
            if (s >= 0.0) return order == 0 ? s : (order == 1 ? 1.0 : 0.0);
            double es = std::exp(s / act.a);
            if (order == 0) return act.a * (es - 1.0);
            if (order == 1) return es;
            return es / act.a;
        }
        case K::selu: {
            constexpr double lambda = 1.0507009873554804934193349852946;
            constexpr double alpha = 1.6732632423543772848170429916717;
            if (s > 0.0) return order == 0 ? lambda * s : (order == 1 ? lambda : 0.0);
            double es = std::exp(s);
            if (order == 0) return lambda * alpha * (es - 1.0);
            return lambda * alpha * es;
        }
        case K::hard_shrink: {
            reject2();
            if (order == 0) return std::fabs(s) > act.a ? s : 0.0;
            return std::fabs(s) > act.a ? 1.0 : 0.0;
        }
        case K::soft_shrink: {
            reject2();
            if (order == 0) {
                if (s > act.a) return s - act.a;
                if (s < -act.a) return s + act.a;
                return 0.0;
            }
            return std::fabs(s) > act.a ? 1.0 : 0.0;
        }
        case K::hard_sigmoid: {
            reject2();
            if (order == 0) {
                if (s >= act.a) return 1.0;
                if (s <= -act.a) return 0.0;
                return s / (2.0 * act.a) + 0.5;
            }
            return (s > -act.a && s < act.a) ? 1.0 / (2.0 * act.a) : 0.0;
        }
        case K::gaussian: {
            double u = (s - act.b) / act.a;
            double g = std::exp(-0.5 * u * u);
            if (order == 0) return g;
            if (order == 1) return -u / act.a * g;
            return (u * u - 1.0) / (act.a * act.a) * g;
        }
        case K::heaviside: {
            if (order > 0)
                throw std::invalid_argument("activation_eval: heaviside has no derivative");
            return act.a * s + act.b > 0.0 ? 1.0 : 0.0;
        }
        case K::linear: {
            if (order == 0) return act.a * s + act.b;
            return order == 1 ? act.a : 0.0;
        }
    }
    throw std::logic_error("activation_eval: unknown kind");
}

// Shallow affine-linear network parameters, flat layout
// (alpha_j, w_j[0..m-1], theta_j) per neuron.
struct ALNNParams {
    int input_dim = 1;
    int neurons = 0;
    Vec values;

    ALNNParams() = default;
    ALNNParams(int m, int n) : input_dim(m), neurons(n), values(static_cast<std::size_t>(n) * (m + 2), 0.0) {}

    std::size_t size() const { return values.size(); }
    void validate() const {
        if (input_dim < 1 || neurons < 1) throw std::invalid_argument("ALNNParams: bad shape");
        if (values.size() != static_cast<std::size_t>(neurons) * (input_dim + 2))
            throw std::invalid_argument("ALNNParams: length must be (m+2) N");
    }

    double alpha(int j) const { return values[static_cast<std::size_t>(j) * (input_dim + 2)]; }
    double weight(int j, int i) const {
        return values[static_cast<std::size_t>(j) * (input_dim + 2) + 1 + i];
    }
    double theta(int j) const {
        return values[static_cast<std::size_t>(j) * (input_dim + 2) + 1 + input_dim];
    }
    double& alpha(int j) { return values[static_cast<std::size_t>(j) * (input_dim + 2)]; }
    double& weight(int j, int i) {
        return values[static_cast<std::size_t>(j) * (input_dim + 2) + 1 + i];
    }
    double& theta(int j) {
        return values[static_cast<std::size_t>(j) * (input_dim + 2) + 1 + input_dim];
    }
};

inline double alnn_eval(const ALNNParams& p, const Activation& act, const Vec& s) {
    p.validate();
    if (s.size() != static_cast<std::size_t>(p.input_dim))
        throw std::invalid_argument("alnn_eval: input dimension mismatch");
    double out = 0.0;
    for (int j = 0; j < p.neurons; ++j) {
        double z = p.theta(j);
        for (int i = 0; i < p.input_dim; ++i) z += p.weight(j, i) * s[i];
        out += p.alpha(j) * activation_eval(act, z, 0);
    }
    return out;
}

// Gradient of the network output with respect to the parameter vector, in
// the flat layout: d/d alpha_j = sigma(z_j), d/d w_ji = alpha_j sigma'(z_j) s_i,
// d/d theta_j = alpha_j sigma'(z_j).
inline Vec alnn_jacobian(const ALNNParams& p, const Activation& act, const Vec& s) {
    p.validate();
    if (s.size() != static_cast<std::size_t>(p.input_dim))
        throw std::invalid_argument("alnn_jacobian: input dimension mismatch");
    Vec grad(p.size(), 0.0);
    for (int j = 0; j < p.neurons; ++j) {
        double z = p.theta(j);
        for (int i = 0; i < p.input_dim; ++i) z += p.weight(j, i) * s[i];
        double sig = activation_eval(act, z, 0);
        double dsig = activation_eval(act, z, 1);
        std::size_t base = static_cast<std::size_t>(j) * (p.input_dim + 2);
        grad[base] = sig;
        for (int i = 0; i < p.input_dim; ++i) grad[base + 1 + i] = p.alpha(j) * dsig * s[i];
        grad[base + 1 + p.input_dim] = p.alpha(j) * dsig;
    }
    return grad;
}

// RQNN atom on the dyadic lattice: scale index k, lattice shift kvec; the
// center is t = 2^{-k/m} kvec and the scale-pair parametrization is
// q+ = (2^{2k/m}, t), q- = (2^{(2k-2)/m}, t).
struct RQNNAtom {
    int k = 0;
    std::vector<int> kvec;

    int dim() const { return static_cast<int>(kvec.size()); }
    double center(int i) const { return std::exp2(-static_cast<double>(k) / dim()) * kvec[i]; }
    std::pair<double, Vec> q_plus() const {
        Vec c(kvec.size());
        for (int i = 0; i < dim(); ++i) c[i] = center(i);
        return {std::exp2(2.0 * k / dim()), c};
    }
    std::pair<double, Vec> q_minus() const {
        Vec c(kvec.size());
        for (int i = 0; i < dim(); ++i) c[i] = center(i);
        return {std::exp2((2.0 * k - 2.0) / dim()), c};
    }

    // inverse of the q+ parametrization
    static RQNNAtom from_q_plus(double q1, const Vec& q2, int m) {
        RQNNAtom atom;
        atom.k = static_cast<int>(std::llround(0.5 * m * std::log2(q1)));
        atom.kvec.resize(q2.size());
        double scale = std::exp2(static_cast<double>(atom.k) / m);
        for (std::size_t i = 0; i < q2.size(); ++i)
            atom.kvec[i] = static_cast<int>(std::llround(q2[i] * scale));
        return atom;
    }
};

namespace detail {

inline void check_rqnn_activation(const Activation& act) {
    using K = Activation::Kind;
    // admissible per the decay condition: the bump sigma(r^2 - |s|^2) must
    // vanish super-polynomially; gaussian (evaluated on its increasing
    // branch), softplus and logistic qualify
    if (act.kind != K::gaussian && act.kind != K::softplus && act.kind != K::sigmoid)
        throw std::invalid_argument("rqnn: activation does not satisfy the decay conditions");
}

// normalizing constant of phi(s) = C sigma(r^2 - |s|^2), m = 1, by wide-range
// midpoint quadrature
inline double rqnn_normalizer(const Activation& act, double r) {
    const int q = 20000;
    const double lo = -16.0, hi = 16.0;
    const double ds = (hi - lo) / q;
    double integral = 0.0;
    for (int i = 0; i < q; ++i) {
        double s = lo + (i + 0.5) * ds;
        integral += activation_eval(act, r * r - s * s, 0);
    }
    integral *= ds;
    if (!(integral > 1e-12)) throw std::invalid_argument("rqnn: activation bump not integrable");
    return 1.0 / integral;
}

inline double cached_rqnn_normalizer(const Activation& act, double r) {
    struct Key {
        int kind = -1;
        double a = 0.0, b = 0.0, r = 0.0, c = 0.0;
    };
    static thread_local Key cache;
    if (cache.kind != static_cast<int>(act.kind) || cache.a != act.a || cache.b != act.b ||
        cache.r != r) {
        cache.c = rqnn_normalizer(act, r);
        cache.kind = static_cast<int>(act.kind);
        cache.a = act.a;
        cache.b = act.b;
        cache.r = r;
    }
    return cache.c;
}

// S_k at an arbitrary center (the wavelet pairs two scales at one center)
inline double rqnn_scaling_eval(int k, double center, const Activation& act, double s, double r) {
    double c = cached_rqnn_normalizer(act, r);
    double scale = std::exp2(static_cast<double>(k));
    double u = scale * (s - center);
    return scale * c * activation_eval(act, r * r - u * u, 0);
}

}  // namespace detail

// Default radial profile for the RQNN machinery: gaussian of the radial
// argument with r = 1; the bump is evaluated on the increasing branch only.
inline Activation rqnn_default_activation() {
    return Activation::gaussian_act(1.0 / std::sqrt(2.0), 1.0);
}

// Scaling function S_{k,t}(s) = 2^k phi(2^{k/m}(s - t)), m = 1.
inline double rqnn_atom_eval(const RQNNAtom& atom, const Activation& act, double s,
                             double r = 1.0) {
    detail::check_rqnn_activation(act);
    if (atom.dim() != 1) throw std::invalid_argument("rqnn_atom_eval: only m = 1 implemented");
    return detail::rqnn_scaling_eval(atom.k, atom.center(0), act, s, r);
}

// Wavelet psi_{k,t} = 2^{-k/2} (S_{k,t} - S_{k-1,t}), both scales at the
// atom's own center t.
inline double rqnn_wavelet_eval(const RQNNAtom& atom, const Activation& act, double s,
                                double r = 1.0) {
    detail::check_rqnn_activation(act);
    if (atom.dim() != 1) throw std::invalid_argument("rqnn_wavelet_eval: only m = 1 implemented");
    double t = atom.center(0);
    double fine = detail::rqnn_scaling_eval(atom.k, t, act, s, r);
    double coarse = detail::rqnn_scaling_eval(atom.k - 1, t, act, s, r);
    return std::exp2(-0.5 * atom.k) * (fine - coarse);
}

struct DictionaryAtom {
    RQNNAtom atom;
    Vec samples;     // values on the target grid
    double norm = 0.0;  // trapezoid L^2 norm on [0,1]
};

// Wavelet dictionary over scales |k| <= M with shift lattice t = 2^{-k} j
// covering [0,1] padded by one atom on each side.
inline std::vector<DictionaryAtom> rqnn_dictionary(int max_scale, int grid_n,
                                                   const Activation& act, double r = 1.0) {
    if (max_scale < 0) throw std::invalid_argument("rqnn_dictionary: max_scale must be >= 0");
    std::vector<DictionaryAtom> out;
    for (int k = -max_scale; k <= max_scale; ++k) {
        double spacing = std::exp2(-static_cast<double>(k));
        int jmax = static_cast<int>(std::ceil(1.0 / spacing)) + 1;
        for (int j = -1; j <= jmax; ++j) {
            DictionaryAtom d;
            d.atom.k = k;
            d.atom.kvec = {j};
            d.samples.resize(static_cast<std::size_t>(grid_n) + 1);
            for (int i = 0; i <= grid_n; ++i)
                d.samples[i] = rqnn_wavelet_eval(d.atom, act, static_cast<double>(i) / grid_n, r);
            GridFunction1D g(grid_n, d.samples);
            d.norm = norm_l2(g);
            if (d.norm > 1e-12) out.push_back(std::move(d));
        }
    }
    return out;
}

struct GreedyResult {
    GridFunction1D approximant;
    std::vector<RQNNAtom> selected;
    Vec coefficients;
    Vec residual_norms;  // one entry per step, after each re-projection
};

// Orthogonal greedy approximation: matching-pursuit selection with full
// re-projection onto the selected span each step.
inline GreedyResult greedy_approximate(const GridFunction1D& f,
                                       const std::vector<DictionaryAtom>& dictionary,
                                       int atom_budget) {
    if (atom_budget < 1) throw std::invalid_argument("greedy_approximate: budget must be >= 1");
    if (dictionary.empty()) throw std::invalid_argument("greedy_approximate: empty dictionary");
    const int n = f.n;
    GreedyResult out;
    out.approximant = GridFunction1D::constant(n, 0.0);
    Vec residual = f.values;
    std::vector<std::size_t> chosen;
    for (int step = 0; step < atom_budget; ++step) {
        GridFunction1D rg(n, residual);
        double best_score = -1.0;
        std::size_t best_idx = dictionary.size();
        for (std::size_t d = 0; d < dictionary.size(); ++d) {
            bool used = false;
            for (std::size_t c : chosen) used = used || c == d;
            if (used) continue;
            GridFunction1D atom_g(n, dictionary[d].samples);
            double score = std::fabs(inner_l2(rg, atom_g)) / dictionary[d].norm;
            if (score > best_score) {
                best_score = score;
                best_idx = d;
            }
        }
        if (best_idx == dictionary.size()) break;
        chosen.push_back(best_idx);

        // re-project f onto the selected span (normal equations via
        // pseudoinverse to tolerate near-dependent selections)
        const std::size_t q = chosen.size();
        Matrix gram(q, q);
        Vec rhs(q);
        for (std::size_t a = 0; a < q; ++a) {
            GridFunction1D ga(n, dictionary[chosen[a]].samples);
            rhs[a] = inner_l2(f, ga);
            for (std::size_t b = 0; b < q; ++b) {
                GridFunction1D gb(n, dictionary[chosen[b]].samples);
                gram(a, b) = inner_l2(ga, gb);
            }
        }
        Vec coeff = pseudoinverse(gram, 1e-12).apply(rhs);
        Vec approx(f.values.size(), 0.0);
        for (std::size_t a = 0; a < q; ++a)
            approx = axpy(coeff[a], dictionary[chosen[a]].samples, approx);
        residual = sub(f.values, approx);
        out.approximant = GridFunction1D(n, approx);
        out.coefficients = coeff;
        GridFunction1D res_g(n, residual);
        out.residual_norms.push_back(norm_l2(res_g));
    }
    for (std::size_t c : chosen) out.selected.push_back(dictionary[c].atom);
    return out;
}

struct GaussNewtonFitOptions {
    int max_iterations = 100;
    double residual_tolerance = 1e-12;
    double svd_truncation = 1e-10;  // relative to the largest singular value
};

// Gauss-Newton fit of an ALNN parametrization to a grid function: iterates
// p <- p - J^dagger r with the Moore-Penrose inverse of the L^2-weighted
// Jacobian, damped by Armijo backtracking on the residual norm. Rank
// collapse of the Jacobian raises a degenerate-parametrization error.
inline std::pair<ALNNParams, IterationLog> gauss_newton_fit(const GridFunction1D& target,
                                                            ALNNParams p_init,
                                                            const Activation& act,
                                                            const GaussNewtonFitOptions& options = {}) {
    p_init.validate();
    if (p_init.input_dim != 1)
        throw std::invalid_argument("gauss_newton_fit: grid targets need input_dim = 1");
    activation_eval(act, 0.3, 2);  // requires a twice differentiable activation

    const int n = target.n;
    Vec sqrt_w = trapezoid_weights(n);
    for (auto& w : sqrt_w) w = std::sqrt(w);

    auto weighted_residual = [&](const ALNNParams& p) {
        Vec r(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) {
            Vec s{target.node(i)};
            r[i] = sqrt_w[i] * (alnn_eval(p, act, s) - target.values[i]);
        }
        return r;
    };

    ALNNParams p = std::move(p_init);
    IterationLog log;
    Vec r = weighted_residual(p);
    double rnorm = norm2(r);
    for (int k = 0;; ++k) {
        IterationRecord rec;
        rec.k = k;
        rec.residual = rnorm;
        log.records.push_back(rec);
        if (rnorm <= options.residual_tolerance) {
            log.reason = StopReason::discrepancy;
            break;
        }
        if (k >= options.max_iterations) {
            log.reason = StopReason::max_iterations;
            break;
        }
        Matrix jac(static_cast<std::size_t>(n) + 1, p.size());
        for (int i = 0; i <= n; ++i) {
            Vec s{target.node(i)};
            Vec row = alnn_jacobian(p, act, s);
            for (std::size_t c = 0; c < row.size(); ++c) jac(i, c) = sqrt_w[i] * row[c];
        }
        Svd dec = svd(jac);
        double smax = dec.singular_values.empty() ? 0.0 : dec.singular_values[0];
        if (smax <= 0.0) throw std::runtime_error("gauss_newton_fit: degenerate parametrization");
        // step = -J^dagger r via the truncated SVD
        Vec step(p.size(), 0.0);
        int kept = 0;
        for (std::size_t c = 0; c < dec.singular_values.size(); ++c) {
            double sv = dec.singular_values[c];
            if (sv <= options.svd_truncation * smax) continue;
            ++kept;
            double coef = -dot(dec.u.col(c), r) / sv;
            step = axpy(coef, dec.v.col(c), step);
        }
        if (kept == 0) throw std::runtime_error("gauss_newton_fit: degenerate parametrization");
        double t = 1.0;
        bool accepted = false;
        for (int back = 0; back < 30; ++back, t *= 0.5) {
            ALNNParams cand = p;
            for (std::size_t c = 0; c < cand.values.size(); ++c) cand.values[c] += t * step[c];
            Vec rc = weighted_residual(cand);
            double rc_norm = norm2(rc);
            if (rc_norm < rnorm) {
                p = std::move(cand);
                r = std::move(rc);
                rnorm = rc_norm;
                accepted = true;
                log.records.back().step_value = t;
                break;
            }
        }
        if (!accepted) {
            log.reason = StopReason::solver_failure;
            break;
        }
    }
    return {p, std::move(log)};
}

}  // namespace invreg
