#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invreg/linalg.hpp"
#include "invreg/rng.hpp"

namespace invreg {

// Sampled real function on the uniform node grid 0, 1/n, ..., 1.
struct GridFunction1D {
    int n = 0;           // node count minus one
    Vec values;          // n+1 entries

    GridFunction1D() = default;
    GridFunction1D(int n_, Vec values_) : n(n_), values(std::move(values_)) { validate(); }

    template <class F>
    static GridFunction1D sample(int n, F&& f) {
        Vec v(static_cast<std::size_t>(n) + 1);
        for (int i = 0; i <= n; ++i) v[i] = f(static_cast<double>(i) / n);
        return GridFunction1D(n, std::move(v));
    }

    static GridFunction1D constant(int n, double c) {
        return GridFunction1D(n, Vec(static_cast<std::size_t>(n) + 1, c));
    }

    double node(int i) const { return static_cast<double>(i) / n; }
    double spacing() const { return 1.0 / n; }

    void validate() const {
        if (n < 2) throw std::invalid_argument("GridFunction1D: n must be >= 2");
        if (values.size() != static_cast<std::size_t>(n) + 1)
            throw std::invalid_argument("GridFunction1D: values must have n+1 entries");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("GridFunction1D: non-finite entry");
    }
};

// Sampled function in Radon coordinates (t, theta) on (-1,1) x [0,pi).
// Both coordinates are sampled at cell midpoints, so t never reaches +-1
// and the weight w(t) = sqrt(1-t^2) never vanishes on the grid.
struct SinogramGrid {
    int nt = 0;
    int ntheta = 0;
    Vec values;  // nt * ntheta, row index t, column index theta

    SinogramGrid() = default;
    SinogramGrid(int nt_, int ntheta_)
        : nt(nt_), ntheta(ntheta_), values(static_cast<std::size_t>(nt_) * ntheta_, 0.0) {
        if (nt < 1 || ntheta < 1) throw std::invalid_argument("SinogramGrid: empty shape");
    }

    double t_node(int i) const { return -1.0 + (i + 0.5) * (2.0 / nt); }
    double theta_node(int j) const { return (j + 0.5) * (pi() / ntheta); }
    double dt() const { return 2.0 / nt; }
    double dtheta() const { return pi() / ntheta; }

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * ntheta + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * ntheta + j]; }

    static constexpr double pi() { return 3.14159265358979323846; }

    void validate() const {
        if (values.size() != static_cast<std::size_t>(nt) * ntheta)
            throw std::invalid_argument("SinogramGrid: bad value count");
        for (double v : values)
            if (!std::isfinite(v)) throw std::invalid_argument("SinogramGrid: non-finite entry");
    }
};

struct NoiseSpec {
    double delta = 0.0;
    std::uint64_t seed = 0;

    NoiseSpec() = default;
    NoiseSpec(double delta_, std::uint64_t seed_) : delta(delta_), seed(seed_) {
        if (delta < 0.0) throw std::invalid_argument("NoiseSpec: delta must be >= 0");
    }
};

inline double radon_weight(double t) { return std::sqrt(1.0 - t * t); }

// Trapezoidal L^2(0,1) inner product on the node grid.
inline double inner_l2(const GridFunction1D& f, const GridFunction1D& g) {
    if (f.n != g.n) throw std::invalid_argument("inner_l2: mismatched grids");
    const double h = f.spacing();
    double s = 0.5 * (f.values[0] * g.values[0] + f.values[f.n] * g.values[g.n]);
    for (int i = 1; i < f.n; ++i) s += f.values[i] * g.values[i];
    return h * s;
}

inline double norm_l2(const GridFunction1D& f) { return std::sqrt(inner_l2(f, f)); }

// Trapezoid weights for the nodal grid; used wherever nodal vectors stand in
// for L^2(0,1) elements.
inline Vec trapezoid_weights(int n) {
    Vec w(static_cast<std::size_t>(n) + 1, 1.0 / n);
    w[0] *= 0.5;
    w[n] *= 0.5;
    return w;
}

inline double trapezoid_inner(const Vec& a, const Vec& b) {
    if (a.size() != b.size() || a.size() < 3)
        throw std::invalid_argument("trapezoid_inner: bad sizes");
    const int n = static_cast<int>(a.size()) - 1;
    const double h = 1.0 / n;
    double s = 0.5 * (a[0] * b[0] + a[n] * b[n]);
    for (int i = 1; i < n; ++i) s += a[i] * b[i];
    return h * s;
}

// Inner product of the weighted space L^2(Z; w^{-1}), midpoint quadrature.
inline double weighted_radon_inner(const SinogramGrid& a, const SinogramGrid& b) {
    if (a.nt != b.nt || a.ntheta != b.ntheta)
        throw std::invalid_argument("weighted_radon_inner: mismatched grids");
    const double cell = a.dt() * a.dtheta();
    double s = 0.0;
    for (int i = 0; i < a.nt; ++i) {
        const double wi = 1.0 / radon_weight(a.t_node(i));
        double row = 0.0;
        for (int j = 0; j < a.ntheta; ++j) row += a.at(i, j) * b.at(i, j);
        s += wi * row;
    }
    return cell * s;
}

inline double weighted_radon_norm(const SinogramGrid& z) {
    return std::sqrt(weighted_radon_inner(z, z));
}

namespace detail {

// Perturbation of exactly the requested norm; the norm is evaluated through
// the supplied inner product so each data space uses its own metric.
template <class NormFn>
Vec noise_direction(std::size_t size, const NoiseSpec& spec, NormFn&& norm_of) {
    std::uint64_t seed = spec.seed;
    for (int attempt = 0; attempt < 64; ++attempt, ++seed) {
        SplitMix64 gen(seed);
        Vec dir = gen.symmetric_vector(size);
        double nrm = norm_of(dir);
        if (nrm > 1e-14) {
            for (auto& v : dir) v *= spec.delta / nrm;
            return dir;
        }
    }
    throw std::runtime_error("add_noise: could not draw a nonzero direction");
}

}  // namespace detail

inline GridFunction1D add_noise(const GridFunction1D& y, const NoiseSpec& spec) {
    if (spec.delta == 0.0) return y;
    Vec dir = detail::noise_direction(y.values.size(), spec, [&](const Vec& v) {
        GridFunction1D g(y.n, v);
        return norm_l2(g);
    });
    GridFunction1D out = y;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += dir[i];
    return out;
}

inline SinogramGrid add_noise(const SinogramGrid& z, const NoiseSpec& spec) {
    if (spec.delta == 0.0) return z;
    Vec dir = detail::noise_direction(z.values.size(), spec, [&](const Vec& v) {
        SinogramGrid g(z.nt, z.ntheta);
        g.values = v;
        return weighted_radon_norm(g);
    });
    SinogramGrid out = z;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += dir[i];
    return out;
}

// Plain Euclidean variant for finite-dimensional data.
inline Vec add_noise(const Vec& y, const NoiseSpec& spec) {
    if (spec.delta == 0.0) return y;
    Vec dir = detail::noise_direction(y.size(), spec, [](const Vec& v) { return norm2(v); });
    return add(y, dir);
}

struct RateFit {
    double exponent = 0.0;
    double intercept = 0.0;
};

// Least-squares slope of log e against log h.
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 pairs");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [h, e] : pairs) {
        if (!(h > 0.0) || !(e > 0.0))
            throw std::invalid_argument("fit_rate: entries must be strictly positive");
        double x = std::log(h), y = std::log(e);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    const double n = static_cast<double>(pairs.size());
    const double denom = n * sxx - sx * sx;
    if (std::fabs(denom) < 1e-30) throw std::invalid_argument("fit_rate: degenerate abscissae");
    RateFit fit;
    fit.exponent = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.exponent * sx) / n;
    return fit;
}

// CSV serialization, >= 15 significant digits, LF line endings.
inline void write_csv(std::ostream& os, const GridFunction1D& f) {
    os << "s,value\n" << std::setprecision(17);
    for (int i = 0; i <= f.n; ++i) os << f.node(i) << ',' << f.values[i] << '\n';
}

inline void write_csv(std::ostream& os, const SinogramGrid& z) {
    os << "t,theta,value\n" << std::setprecision(17);
    for (int i = 0; i < z.nt; ++i)
        for (int j = 0; j < z.ntheta; ++j)
            os << z.t_node(i) << ',' << z.theta_node(j) << ',' << z.at(i, j) << '\n';
}

}  // namespace invreg
