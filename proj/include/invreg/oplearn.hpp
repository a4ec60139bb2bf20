#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invreg/linalg.hpp"
#include "invreg/problems.hpp"

namespace invreg {

// Ordered expert pairs (x^(l), y^(l)), optionally with features z^(l).
struct ExpertSet {
    std::vector<Vec> inputs;
    std::vector<Vec> outputs;
    std::vector<Vec> features;

    std::size_t size() const { return inputs.size(); }

    void validate() const {
        if (inputs.empty() || inputs.size() != outputs.size())
            throw std::invalid_argument("ExpertSet: inputs/outputs must be nonempty, same count");
        for (const Vec& x : inputs)
            if (x.size() != inputs.front().size())
                throw std::invalid_argument("ExpertSet: input shapes differ");
        for (const Vec& y : outputs)
            if (y.size() != outputs.front().size())
                throw std::invalid_argument("ExpertSet: output shapes differ");
        if (!features.empty() && features.size() != inputs.size())
            throw std::invalid_argument("ExpertSet: feature count mismatch");
    }
};

struct OrthoBasis {
    std::vector<Vec> vectors;  // orthonormalized (near-orthonormal for eps > 0)
    Matrix r_matrix;           // upper triangular, R_ij = <y_j, ybar_i>
    double epsilon = 0.0;
    bool near_dependence = false;  // eps > 0 path hit a tiny residual
};

// Classical Gram-Schmidt with the sigma (exact) or sigma_eps (regularized)
// normalizer; inner products are sequentially re-orthogonalized for
// numerical stability. eps = 0 with dependent inputs throws.
inline OrthoBasis gram_schmidt(const std::vector<Vec>& vectors, double epsilon = 0.0) {
    if (vectors.empty()) throw std::invalid_argument("gram_schmidt: no vectors");
    if (epsilon < 0.0) throw std::invalid_argument("gram_schmidt: epsilon must be >= 0");
    OrthoBasis out;
    out.epsilon = epsilon;
    for (const Vec& y : vectors) {
        Vec a = y;
        for (const Vec& q : out.vectors) a = axpy(-dot(q, a) / dot(q, q), q, a);
        // second re-orthogonalization pass
        for (const Vec& q : out.vectors) a = axpy(-dot(q, a) / dot(q, q), q, a);
        double nrm = norm2(a);
        if (epsilon == 0.0) {
            if (nrm <= 1e-12 * (norm2(y) + 1e-300))
                throw std::invalid_argument("gram_schmidt: linearly dependent inputs");
            out.vectors.push_back(scaled(a, 1.0 / nrm));
        } else {
            if (nrm <= 1e-12 * (norm2(y) + 1e-300)) out.near_dependence = true;
            out.vectors.push_back(scaled(a, 1.0 / std::sqrt(nrm * nrm + epsilon * epsilon)));
        }
    }
    const std::size_t n = vectors.size();
    out.r_matrix = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) out.r_matrix(i, j) = dot(vectors[j], out.vectors[i]);
    return out;
}

// Solves F x = y_query from expert pairs by orthonormalizing the outputs,
// mapping the inputs through R^{-1}, and expanding the query in the
// orthonormal output basis.
inline Vec gs_learn_solve(const ExpertSet& experts, const Vec& y_query) {
    experts.validate();
    OrthoBasis basis = gram_schmidt(experts.outputs, 0.0);
    const std::size_t n0 = experts.size();
    // underline-X = X R^{-1}, column l solves R^T-style triangular systems:
    // x_under_l = (x_l - sum_{i<l} R_il x_under_i) / R_ll
    std::vector<Vec> x_under(n0);
    for (std::size_t l = 0; l < n0; ++l) {
        Vec v = experts.inputs[l];
        for (std::size_t i = 0; i < l; ++i) v = axpy(-basis.r_matrix(i, l), x_under[i], v);
        x_under[l] = scaled(v, 1.0 / basis.r_matrix(l, l));
    }
    Vec x(experts.inputs.front().size(), 0.0);
    for (std::size_t l = 0; l < n0; ++l)
        x = axpy(dot(y_query, basis.vectors[l]), x_under[l], x);
    return x;
}

// Least-squares operator F = Y X^T (X X^T)^dagger.
inline Matrix least_squares_operator(const ExpertSet& experts) {
    experts.validate();
    const std::size_t m = experts.inputs.front().size();
    const std::size_t n = experts.outputs.front().size();
    const std::size_t n0 = experts.size();
    Matrix X(m, n0), Y(n, n0);
    for (std::size_t l = 0; l < n0; ++l) {
        X.set_col(l, experts.inputs[l]);
        Y.set_col(l, experts.outputs[l]);
    }
    Matrix xxt = X.multiply(X.transposed());
    Matrix pinv = pseudoinverse(xxt, 1e-12);
    return Y.multiply(X.transposed()).multiply(pinv);
}

struct SingularEstimate {
    double value = 0.0;
    Vec direction;  // data-space principal direction
};

// Two-step orthonormalization: orthonormalize the inputs, map the
// outputs through the same change of basis, and read singular values off the
// PCA of Ybar Ybar^T. When the data dimension exceeds the sample count the
// spectrum is computed from the small Gram matrix Ybar^T Ybar, which carries
// the same nonzero eigenvalues.
inline std::vector<SingularEstimate> bi_orthonormalize_svd(const ExpertSet& experts) {
    experts.validate();
    OrthoBasis xbasis = gram_schmidt(experts.inputs, 0.0);
    const std::size_t n0 = experts.size();
    const std::size_t n = experts.outputs.front().size();
    // Ybar = Y R^{-1}
    std::vector<Vec> ybar(n0);
    for (std::size_t l = 0; l < n0; ++l) {
        Vec v = experts.outputs[l];
        for (std::size_t i = 0; i < l; ++i) v = axpy(-xbasis.r_matrix(i, l), ybar[i], v);
        ybar[l] = scaled(v, 1.0 / xbasis.r_matrix(l, l));
    }
    Matrix Yb(n, n0);
    for (std::size_t l = 0; l < n0; ++l) Yb.set_col(l, ybar[l]);

    std::vector<SingularEstimate> out;
    if (n <= n0) {
        SymmetricEigen eig = eigen_symmetric(Yb.multiply(Yb.transposed()));
        for (std::size_t j = 0; j < eig.values.size(); ++j) {
            SingularEstimate est;
            est.value = std::sqrt(std::max(0.0, eig.values[j]));
            est.direction = eig.vectors.col(j);
            out.push_back(std::move(est));
        }
    } else {
        SymmetricEigen eig = eigen_symmetric(Yb.gram());
        for (std::size_t j = 0; j < eig.values.size(); ++j) {
            SingularEstimate est;
            est.value = std::sqrt(std::max(0.0, eig.values[j]));
            Vec dir = Yb.apply(eig.vectors.col(j));
            double nrm = norm2(dir);
            if (nrm > 1e-300) dir = scaled(dir, 1.0 / nrm);
            est.direction = std::move(dir);
            out.push_back(std::move(est));
        }
    }
    return out;
}

enum class KernelKind { gaussian, exponential, cauchy, t_student, inverse_multiquadric };

struct KernelSpec {
    KernelKind kind = KernelKind::gaussian;
    double bandwidth = 1.0;  // sigma
    double theta = 1.0;      // t-student exponent, in (0,2)

    void validate() const {
        if (!(bandwidth > 0.0)) throw std::invalid_argument("KernelSpec: bandwidth must be > 0");
        if (kind == KernelKind::t_student && !(theta > 0.0 && theta < 2.0))
            throw std::invalid_argument("KernelSpec: t-student exponent must lie in (0,2)");
    }
};

// Radial kernel profile catalog.
inline double kernel_eval(const KernelSpec& kernel, double r) {
    kernel.validate();
    if (r < 0.0) throw std::invalid_argument("kernel_eval: r must be >= 0");
    const double s2 = kernel.bandwidth * kernel.bandwidth;
    switch (kernel.kind) {
        case KernelKind::gaussian: return std::exp(-r * r / s2);
        case KernelKind::exponential: return std::exp(-r / s2);
        case KernelKind::cauchy: return 1.0 / (1.0 + r * r / s2);
        case KernelKind::t_student: return 1.0 / (1.0 + std::pow(r, kernel.theta));
        case KernelKind::inverse_multiquadric: return 1.0 / std::sqrt(r * r + s2);
    }
    throw std::logic_error("kernel_eval: unknown kind");
}

// d kappa / dr
inline double kernel_eval_deriv(const KernelSpec& kernel, double r) {
    kernel.validate();
    const double s2 = kernel.bandwidth * kernel.bandwidth;
    switch (kernel.kind) {
        case KernelKind::gaussian: return -2.0 * r / s2 * std::exp(-r * r / s2);
        case KernelKind::exponential: return -1.0 / s2 * std::exp(-r / s2);
        case KernelKind::cauchy: {
            double d = 1.0 + r * r / s2;
            return -2.0 * r / s2 / (d * d);
        }
        case KernelKind::t_student: {
            if (r == 0.0) return 0.0;
            double d = 1.0 + std::pow(r, kernel.theta);
            return -kernel.theta * std::pow(r, kernel.theta - 1.0) / (d * d);
        }
        case KernelKind::inverse_multiquadric: return -r * std::pow(r * r + s2, -1.5);
    }
    throw std::logic_error("kernel_eval_deriv: unknown kind");
}

struct RkhsModel {
    std::vector<Vec> points;
    Vec coefficients;
    KernelSpec kernel;
    double alpha = 0.0;
};

// Penalized least squares in the RKHS: c = n0^{-1} (alpha I + n0^{-1} K)^{-1} Y.
inline RkhsModel rkhs_regress(const std::vector<Vec>& points, const Vec& values,
                              const KernelSpec& kernel, double alpha) {
    kernel.validate();
    if (!(alpha > 0.0)) throw std::invalid_argument("rkhs_regress: alpha must be > 0");
    if (points.empty() || points.size() != values.size())
        throw std::invalid_argument("rkhs_regress: points/values mismatch");
    const std::size_t n0 = points.size();
    Matrix system(n0, n0);
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n0; ++j) {
            double k = kernel_eval(kernel, norm2(sub(points[i], points[j])));
            system(i, j) = k / n0 + (i == j ? alpha : 0.0);
        }
    RkhsModel model;
    model.points = points;
    model.kernel = kernel;
    model.alpha = alpha;
    model.coefficients = scaled(solve_dense(system, values), 1.0 / n0);
    return model;
}

inline double rkhs_predict(const RkhsModel& model, const Vec& query) {
    double s = 0.0;
    for (std::size_t l = 0; l < model.points.size(); ++l)
        s += model.coefficients[l] * kernel_eval(model.kernel, norm2(sub(query, model.points[l])));
    return s;
}

// Operator-valued kernel regression with scalar radial kernels: the fitted
// operator is F_alpha[x] = sum_l y^(l) c_l[x] with
// c[x] = n0^{-1} (alpha I + n0^{-1} K)^{-1} Y^n[x]. The parameter-space inner
// product is configurable so the model can act as a surrogate for PDE
// problems discretized with non-Euclidean metrics.
class VRKHSModel : public ForwardProblem {
public:
    using InnerFn = std::function<double(const Vec&, const Vec&)>;

    VRKHSModel(ExpertSet experts, KernelSpec kernel, double alpha,
               InnerFn param_inner_fn = nullptr, InnerFn data_inner_fn = nullptr)
        : experts_(std::move(experts)),
          kernel_(kernel),
          alpha_(alpha),
          param_inner_(std::move(param_inner_fn)),
          data_inner_(std::move(data_inner_fn)) {
        experts_.validate();
        kernel_.validate();
        if (!(alpha_ > 0.0)) throw std::invalid_argument("VRKHSModel: alpha must be > 0");
        const std::size_t n0 = experts_.size();
        system_ = Matrix(n0, n0);
        for (std::size_t i = 0; i < n0; ++i)
            for (std::size_t j = 0; j < n0; ++j) {
                double k = kernel_eval(kernel_, input_distance(experts_.inputs[i], experts_.inputs[j]));
                system_(i, j) = k / n0 + (i == j ? alpha_ : 0.0);
            }
    }

    std::size_t param_dim() const override { return experts_.inputs.front().size(); }
    std::size_t data_dim() const override { return experts_.outputs.front().size(); }
    const ExpertSet& experts() const { return experts_; }
    double alpha() const { return alpha_; }
    const KernelSpec& kernel() const { return kernel_; }

    Vec coefficients(const Vec& x) const {
        const std::size_t n0 = experts_.size();
        Vec kx(n0);
        for (std::size_t l = 0; l < n0; ++l)
            kx[l] = kernel_eval(kernel_, input_distance(x, experts_.inputs[l]));
        return scaled(solve_dense(system_, kx), 1.0 / n0);
    }

    Vec apply(const Vec& x) const override {
        Vec c = coefficients(x);
        Vec out(data_dim(), 0.0);
        for (std::size_t l = 0; l < experts_.size(); ++l)
            out = axpy(c[l], experts_.outputs[l], out);
        return out;
    }

    // dF[x]h = sum_l y^(l) (M g(h))_l with g(h)_j = <grad_j, h>_X and
    // grad_j = kappa'(r_j)/r_j (x - x^(j)).
    Vec deriv(const Vec& x, const Vec& h) const override {
        auto grads = input_gradients(x);
        const std::size_t n0 = experts_.size();
        Vec g(n0);
        for (std::size_t l = 0; l < n0; ++l) g[l] = param_inner(grads[l], h);
        Vec c = scaled(solve_dense(system_, g), 1.0 / n0);
        Vec out(data_dim(), 0.0);
        for (std::size_t l = 0; l < n0; ++l) out = axpy(c[l], experts_.outputs[l], out);
        return out;
    }

    Vec deriv_adjoint(const Vec& x, const Vec& w) const override {
        auto grads = input_gradients(x);
        const std::size_t n0 = experts_.size();
        Vec q(n0);
        for (std::size_t l = 0; l < n0; ++l) q[l] = data_inner(experts_.outputs[l], w);
        Vec c = scaled(solve_dense(system_, q), 1.0 / n0);  // system is symmetric
        Vec out(param_dim(), 0.0);
        for (std::size_t l = 0; l < n0; ++l) out = axpy(c[l], grads[l], out);
        return out;
    }

    double param_inner(const Vec& a, const Vec& b) const override {
        return param_inner_ ? param_inner_(a, b) : dot(a, b);
    }
    double data_inner(const Vec& a, const Vec& b) const override {
        return data_inner_ ? data_inner_(a, b) : dot(a, b);
    }

    // representer coefficients h (one row per expert) of the fitted operator,
    // F[.] = sum_j K[., x^(j)] h_j
    std::vector<Vec> representer_coefficients() const {
        const std::size_t n0 = experts_.size();
        const std::size_t nd = data_dim();
        std::vector<Vec> h(n0, Vec(nd, 0.0));
        for (std::size_t d = 0; d < nd; ++d) {
            Vec col(n0);
            for (std::size_t l = 0; l < n0; ++l) col[l] = experts_.outputs[l][d];
            Vec sol = scaled(solve_dense(system_, col), 1.0 / n0);
            for (std::size_t l = 0; l < n0; ++l) h[l][d] = sol[l];
        }
        return h;
    }

private:
    double input_distance(const Vec& a, const Vec& b) const {
        Vec d = sub(a, b);
        return std::sqrt(std::max(0.0, param_inner(d, d)));
    }

    std::vector<Vec> input_gradients(const Vec& x) const {
        const std::size_t n0 = experts_.size();
        std::vector<Vec> grads(n0);
        for (std::size_t l = 0; l < n0; ++l) {
            Vec d = sub(x, experts_.inputs[l]);
            double r = std::sqrt(std::max(0.0, param_inner(d, d)));
            double factor = r > 1e-14 ? kernel_eval_deriv(kernel_, r) / r : 0.0;
            grads[l] = scaled(d, factor);
        }
        return grads;
    }

    ExpertSet experts_;
    KernelSpec kernel_;
    double alpha_;
    Matrix system_;
    InnerFn param_inner_;
    InnerFn data_inner_;
};

inline VRKHSModel vrkhs_fit(ExpertSet experts, const KernelSpec& kernel, double alpha,
                            VRKHSModel::InnerFn param_inner = nullptr,
                            VRKHSModel::InnerFn data_inner = nullptr) {
    return VRKHSModel(std::move(experts), kernel, alpha, std::move(param_inner),
                      std::move(data_inner));
}

inline Vec vrkhs_predict(const VRKHSModel& model, const Vec& x_query) {
    return model.apply(x_query);
}

}  // namespace invreg
