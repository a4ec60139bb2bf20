#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "invreg/linalg.hpp"
#include "invreg/numcore.hpp"

namespace invreg {

// Behavioral contract every forward operator implements. Parameter and data
// elements are nodal/coefficient vectors; each problem supplies the inner
// products under which its derivative adjoint is exact.
class ForwardProblem {
public:
    virtual ~ForwardProblem() = default;

    virtual std::size_t param_dim() const = 0;
    virtual std::size_t data_dim() const = 0;

    virtual Vec apply(const Vec& x) const = 0;
    virtual Vec deriv(const Vec& x, const Vec& h) const = 0;
    virtual Vec deriv_adjoint(const Vec& x, const Vec& w) const = 0;
    virtual Vec project_domain(Vec x) const { return x; }

    virtual double param_inner(const Vec& a, const Vec& b) const { return dot(a, b); }
    virtual double data_inner(const Vec& a, const Vec& b) const { return dot(a, b); }

    double param_norm(const Vec& a) const { return std::sqrt(param_inner(a, a)); }
    double data_norm(const Vec& a) const { return std::sqrt(data_inner(a, a)); }
};

// -y'' + x y = f on (0,1), y(0) = y(1) = 0, discretized with linear finite
// elements on the uniform node grid; the reaction and load terms use
// trapezoidal (lumped) quadrature so the system stays tridiagonal.
class CExampleProblem : public ForwardProblem {
public:
    CExampleProblem(GridFunction1D f, int n) : f_(std::move(f)), n_(n) {
        if (f_.n != n_) throw std::invalid_argument("CExampleProblem: f must live on the FEM grid");
        if (n_ < 2) throw std::invalid_argument("CExampleProblem: n too small");
    }

    static CExampleProblem with_source(int n, double (*f)(double)) {
        return CExampleProblem(GridFunction1D::sample(n, f), n);
    }

    std::size_t param_dim() const override { return static_cast<std::size_t>(n_) + 1; }
    std::size_t data_dim() const override { return static_cast<std::size_t>(n_) + 1; }
    int resolution() const { return n_; }
    const GridFunction1D& source() const { return f_; }

    Vec apply(const Vec& x) const override {
        check_domain(x);
        Vec y_int = solve_system(x, lumped_interior(f_.values));
        return embed(y_int);
    }

    // u solves -u'' + x u = -h * y[x].
    Vec deriv(const Vec& x, const Vec& h) const override {
        check_domain(x);
        Vec y = apply(x);
        Vec rhs(static_cast<std::size_t>(n_) - 1);
        const double dx = 1.0 / n_;
        for (int i = 1; i < n_; ++i) rhs[i - 1] = -dx * h[i] * y[i];
        return embed(solve_system(x, rhs));
    }

    // p solves -p'' + x p = w; returns -y[x] * p.
    Vec deriv_adjoint(const Vec& x, const Vec& w) const override {
        check_domain(x);
        Vec y = apply(x);
        Vec p = solve_system(x, lumped_interior(w));
        Vec g(param_dim(), 0.0);
        for (int i = 1; i < n_; ++i) g[i] = -y[i] * p[i - 1];
        return g;
    }

    Vec project_domain(Vec x) const override {
        for (auto& v : x) v = std::max(v, 0.0);
        return x;
    }

    double param_inner(const Vec& a, const Vec& b) const override { return trapezoid_inner(a, b); }
    double data_inner(const Vec& a, const Vec& b) const override { return trapezoid_inner(a, b); }

private:
    void check_domain(const Vec& x) const {
        if (x.size() != param_dim()) throw std::invalid_argument("CExampleProblem: bad x size");
        for (double v : x)
            if (v < 0.0) throw std::domain_error("CExampleProblem: x must be >= 0 nodewise");
    }

    Vec lumped_interior(const Vec& full) const {
        const double h = 1.0 / n_;
        Vec rhs(static_cast<std::size_t>(n_) - 1);
        for (int i = 1; i < n_; ++i) rhs[i - 1] = h * full[i];
        return rhs;
    }

    // (K + h diag(x)) on interior nodes.
    Vec solve_system(const Vec& x, const Vec& rhs) const {
        const std::size_t m = static_cast<std::size_t>(n_) - 1;
        const double h = 1.0 / n_;
        Vec sub(m, -1.0 / h), diag(m), sup(m, -1.0 / h);
        for (std::size_t i = 0; i < m; ++i) diag[i] = 2.0 / h + h * x[i + 1];
        return solve_tridiagonal(sub, diag, sup, rhs);
    }

    Vec embed(const Vec& interior) const {
        Vec full(param_dim(), 0.0);
        for (int i = 1; i < n_; ++i) full[i] = interior[i - 1];
        return full;
    }

    GridFunction1D f_;
    int n_;
};

// -(x y')' = f on (0,1), y(0) = y(1) = 0, x >= nu > 0; Galerkin with linear
// elements, element coefficient averaged from the two element nodes.
class AExampleProblem : public ForwardProblem {
public:
    AExampleProblem(GridFunction1D f, int n, double nu) : f_(std::move(f)), n_(n), nu_(nu) {
        if (f_.n != n_) throw std::invalid_argument("AExampleProblem: f must live on the FEM grid");
        if (!(nu_ > 0.0)) throw std::invalid_argument("AExampleProblem: nu must be > 0");
    }

    std::size_t param_dim() const override { return static_cast<std::size_t>(n_) + 1; }
    std::size_t data_dim() const override { return static_cast<std::size_t>(n_) + 1; }
    int resolution() const { return n_; }
    double lower_bound() const { return nu_; }

    Vec apply(const Vec& x) const override {
        check_domain(x);
        return embed(solve_system(x, lumped_interior(f_.values)));
    }

    // u solves <x u', v'> = -<h y'[x], v'>.
    Vec deriv(const Vec& x, const Vec& h) const override {
        check_domain(x);
        Vec y = apply(x);
        Vec rhs = weighted_stiffness_apply(h, y);
        for (auto& v : rhs) v = -v;
        return embed(solve_system(x, rhs));
    }

    Vec deriv_adjoint(const Vec& x, const Vec& w) const override {
        check_domain(x);
        Vec y = apply(x);
        Vec p_int = solve_system(x, lumped_interior(w));
        Vec p = embed(p_int);
        // <F'[x]h, w> = -sum_elements (h_i+h_{i+1})/(2h) (dY)(dP); collect the
        // coefficient of each h_i and divide by the trapezoid weight.
        const double h = 1.0 / n_;
        Vec c(param_dim(), 0.0);
        for (int e = 0; e < n_; ++e) {
            double dy = y[e + 1] - y[e];
            double dp = p[e + 1] - p[e];
            double contrib = dy * dp / (2.0 * h);
            c[e] += contrib;
            c[e + 1] += contrib;
        }
        Vec weights = trapezoid_weights(n_);
        Vec g(param_dim());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = -c[i] / weights[i];
        return g;
    }

    Vec project_domain(Vec x) const override {
        for (auto& v : x) v = std::max(v, nu_);
        return x;
    }

    double param_inner(const Vec& a, const Vec& b) const override { return trapezoid_inner(a, b); }
    double data_inner(const Vec& a, const Vec& b) const override { return trapezoid_inner(a, b); }

private:
    void check_domain(const Vec& x) const {
        if (x.size() != param_dim()) throw std::invalid_argument("AExampleProblem: bad x size");
        for (double v : x)
            if (v < nu_ - 1e-12) throw std::domain_error("AExampleProblem: x must be >= nu nodewise");
    }

    Vec lumped_interior(const Vec& full) const {
        const double h = 1.0 / n_;
        Vec rhs(static_cast<std::size_t>(n_) - 1);
        for (int i = 1; i < n_; ++i) rhs[i - 1] = h * full[i];
        return rhs;
    }

    // Interior result of v -> K(coeff) v with element weights
    // (coeff_i + coeff_{i+1})/2.
    Vec weighted_stiffness_apply(const Vec& coeff, const Vec& v) const {
        const double h = 1.0 / n_;
        Vec out(static_cast<std::size_t>(n_) - 1, 0.0);
        for (int e = 0; e < n_; ++e) {
            double a = 0.5 * (coeff[e] + coeff[e + 1]) / h;
            double dv = v[e + 1] - v[e];
            if (e >= 1) out[e - 1] -= a * dv;
            if (e + 1 <= n_ - 1) out[e] += a * dv;
        }
        return out;
    }

    Vec solve_system(const Vec& x, const Vec& rhs) const {
        const std::size_t m = static_cast<std::size_t>(n_) - 1;
        const double h = 1.0 / n_;
        Vec sub(m, 0.0), diag(m, 0.0), sup(m, 0.0);
        for (int e = 0; e < n_; ++e) {
            double a = 0.5 * (x[e] + x[e + 1]) / h;
            if (e >= 1 && e <= n_ - 1) diag[e - 1] += a;
            if (e + 1 >= 1 && e + 1 <= n_ - 1) diag[e] += a;
            if (e >= 1 && e + 1 <= n_ - 1) {
                sup[e - 1] -= a;
                sub[e] -= a;
            }
        }
        return solve_tridiagonal(sub, diag, sup, rhs);
    }

    Vec embed(const Vec& interior) const {
        Vec full(param_dim(), 0.0);
        for (int i = 1; i < n_; ++i) full[i] = interior[i - 1];
        return full;
    }

    GridFunction1D f_;
    int n_;
    double nu_;
};

// Componentwise multiplication by fixed singular values; the closed-form
// oracle behind the Tikhonov and Landweber tests.
class DiagonalOperator : public ForwardProblem {
public:
    explicit DiagonalOperator(Vec sigma) : sigma_(std::move(sigma)) {
        for (double s : sigma_)
            if (s < 0.0) throw std::invalid_argument("DiagonalOperator: sigma must be >= 0");
    }

    std::size_t param_dim() const override { return sigma_.size(); }
    std::size_t data_dim() const override { return sigma_.size(); }
    const Vec& sigma() const { return sigma_; }

    Vec apply(const Vec& x) const override { return multiply(x); }
    Vec deriv(const Vec&, const Vec& h) const override { return multiply(h); }
    Vec deriv_adjoint(const Vec&, const Vec& w) const override { return multiply(w); }

private:
    Vec multiply(const Vec& v) const {
        if (v.size() != sigma_.size()) throw std::invalid_argument("DiagonalOperator: size mismatch");
        Vec r(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) r[i] = sigma_[i] * v[i];
        return r;
    }

    Vec sigma_;
};

// Closed-form Tikhonov minimizer for a diagonal linear operator:
// x_j = (sigma_j y_j + alpha x0_j) / (sigma_j^2 + alpha).
inline Vec diagonal_tikhonov_exact(const DiagonalOperator& op, const Vec& y, const Vec& x0,
                                   double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("diagonal_tikhonov_exact: alpha must be > 0");
    const Vec& s = op.sigma();
    if (y.size() != s.size() || x0.size() != s.size())
        throw std::invalid_argument("diagonal_tikhonov_exact: size mismatch");
    Vec x(s.size());
    for (std::size_t j = 0; j < s.size(); ++j)
        x[j] = (s[j] * y[j] + alpha * x0[j]) / (s[j] * s[j] + alpha);
    return x;
}

// ||F'[x0]|| by power iteration on F'* F'.
inline double estimate_deriv_norm(const ForwardProblem& problem, const Vec& x0,
                                  std::uint64_t seed = 1234, int iterations = 60) {
    SplitMix64 gen(seed);
    Vec v = gen.symmetric_vector(problem.param_dim());
    double nrm = problem.param_norm(v);
    if (nrm < 1e-14) { v.assign(problem.param_dim(), 1.0); nrm = problem.param_norm(v); }
    for (auto& c : v) c /= nrm;
    double lambda = 0.0;
    for (int it = 0; it < iterations; ++it) {
        Vec av = problem.deriv_adjoint(x0, problem.deriv(x0, v));
        lambda = std::sqrt(std::max(0.0, problem.param_inner(av, v)));
        double an = problem.param_norm(av);
        if (an < 1e-300) return 0.0;
        for (auto& c : av) c /= an;
        v = std::move(av);
    }
    return lambda;
}

}  // namespace invreg
