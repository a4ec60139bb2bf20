#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "invreg/linalg.hpp"
#include "invreg/numcore.hpp"

namespace invreg {

// Pixel image on [-1,1]^2 supported in the closed unit disk; values at pixel
// centers outside the disk are kept at zero.
struct ImageGrid {
    int m = 0;   // pixels per side
    Vec values;  // m*m, row index = first coordinate

    ImageGrid() = default;
    explicit ImageGrid(int m_) : m(m_), values(static_cast<std::size_t>(m_) * m_, 0.0) {
        if (m < 2) throw std::invalid_argument("ImageGrid: m too small");
    }

    double center(int i) const { return -1.0 + (i + 0.5) * (2.0 / m); }
    double spacing() const { return 2.0 / m; }

    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * m + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * m + j]; }

    bool inside_disk(int i, int j) const {
        double a = center(i), b = center(j);
        return a * a + b * b <= 1.0;
    }

    void apply_disk_mask() {
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (!inside_disk(i, j)) at(i, j) = 0.0;
    }

    template <class F>
    static ImageGrid sample(int m, F&& f) {
        ImageGrid img(m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (img.inside_disk(i, j)) img.at(i, j) = f(img.center(i), img.center(j));
        return img;
    }

    // L^2(B_1(0)) inner product, pixel midpoint quadrature.
    double inner(const ImageGrid& other) const {
        if (other.m != m) throw std::invalid_argument("ImageGrid::inner: mismatched grids");
        double cell = spacing() * spacing();
        double s = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * other.values[i];
        return cell * s;
    }

    double norm() const { return std::sqrt(inner(*this)); }
};

// Bilinear interpolation of pixel-center samples; zero outside the grid.
inline double image_interpolate(const ImageGrid& img, double a, double b) {
    const double inv = 1.0 / img.spacing();
    double fi = (a + 1.0) * inv - 0.5;
    double fj = (b + 1.0) * inv - 0.5;
    int i0 = static_cast<int>(std::floor(fi));
    int j0 = static_cast<int>(std::floor(fj));
    double wi = fi - i0, wj = fj - j0;
    double v = 0.0;
    for (int di = 0; di <= 1; ++di)
        for (int dj = 0; dj <= 1; ++dj) {
            int i = i0 + di, j = j0 + dj;
            if (i < 0 || j < 0 || i >= img.m || j >= img.m) continue;
            double w = (di ? wi : 1.0 - wi) * (dj ? wj : 1.0 - wj);
            v += w * img.at(i, j);
        }
    return v;
}

namespace detail {

// Segment lengths of the line t n(theta) + s n(theta)^perp through the pixel
// grid; visit(i, j, length) is called once per traversed pixel.
template <class Visit>
void walk_line_pixels(const ImageGrid& img, double t, double theta, Visit&& visit) {
    if (std::fabs(t) >= 1.0) return;
    const double ox = t * std::cos(theta), oy = t * std::sin(theta);
    const double dx = -std::sin(theta), dy = std::cos(theta);
    double smin = -1.5, smax = 1.5;
    auto clip = [&](double o, double d) {
        if (std::fabs(d) < 1e-15) {
            if (o < -1.0 || o > 1.0) { smin = 1.0; smax = -1.0; }
            return;
        }
        double s1 = (-1.0 - o) / d, s2 = (1.0 - o) / d;
        if (s1 > s2) std::swap(s1, s2);
        smin = std::max(smin, s1);
        smax = std::min(smax, s2);
    };
    clip(ox, dx);
    clip(oy, dy);
    if (smin >= smax) return;
    const double h = img.spacing();
    std::vector<double> ss;
    ss.reserve(2 * img.m + 4);
    ss.push_back(smin);
    ss.push_back(smax);
    if (std::fabs(dx) > 1e-15)
        for (int i = 1; i < img.m; ++i) {
            double s = (-1.0 + i * h - ox) / dx;
            if (s > smin && s < smax) ss.push_back(s);
        }
    if (std::fabs(dy) > 1e-15)
        for (int i = 1; i < img.m; ++i) {
            double s = (-1.0 + i * h - oy) / dy;
            if (s > smin && s < smax) ss.push_back(s);
        }
    std::sort(ss.begin(), ss.end());
    for (std::size_t q = 0; q + 1 < ss.size(); ++q) {
        double len = ss[q + 1] - ss[q];
        if (len <= 1e-15) continue;
        double sm = 0.5 * (ss[q] + ss[q + 1]);
        int i = static_cast<int>(std::floor((ox + sm * dx + 1.0) / h));
        int j = static_cast<int>(std::floor((oy + sm * dy + 1.0) / h));
        if (i < 0 || j < 0 || i >= img.m || j >= img.m) continue;
        visit(i, j, len);
    }
}

}  // namespace detail

// Integral of the piecewise-constant pixel image along the line
// t n(theta) + s n(theta)^perp, by exact pixel-intersection lengths.
inline double radon_line_integral(const ImageGrid& img, double t, double theta) {
    double total = 0.0;
    detail::walk_line_pixels(img, t, theta,
                             [&](int i, int j, double len) { total += len * img.at(i, j); });
    return total;
}

inline SinogramGrid radon_apply(const ImageGrid& x, int nt, int ntheta) {
    SinogramGrid z(nt, ntheta);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < ntheta; ++j)
            z.at(i, j) = radon_line_integral(x, z.t_node(i), z.theta_node(j));
    return z;
}

// Line integral of a continuous integrand f(a, b), composite midpoint with a
// t-dependent (theta-independent) step count.
template <class F>
double radon_line_integral_fn(F&& f, double t, double theta, double max_step) {
    if (std::fabs(t) >= 1.0) return 0.0;
    const double half = std::sqrt(1.0 - t * t);
    int steps = std::max(1, static_cast<int>(std::ceil(2.0 * half / max_step)));
    const double ds = 2.0 * half / steps;
    const double ct = std::cos(theta), st = std::sin(theta);
    double sum = 0.0;
    for (int k = 0; k < steps; ++k) {
        double s = -half + (k + 0.5) * ds;
        sum += f(t * ct - s * st, t * st + s * ct);
    }
    return sum * ds;
}

template <class F>
SinogramGrid radon_apply_fn(F&& f, int nt, int ntheta, double max_step) {
    SinogramGrid z(nt, ntheta);
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < ntheta; ++j)
            z.at(i, j) = radon_line_integral_fn(f, z.t_node(i), z.theta_node(j), max_step);
    return z;
}

namespace detail {

// Linear interpolation of sinogram values in t at fixed theta index; clipped
// to zero on the outermost half cell, where w^{-1} blows up.
inline double sinogram_interp_t(const SinogramGrid& z, double t, int j) {
    const double ht = z.dt();
    if (std::fabs(t) >= 1.0 - 0.5 * ht) return 0.0;
    double fi = (t + 1.0) / ht - 0.5;
    int i0 = static_cast<int>(std::floor(fi));
    double w = fi - i0;
    double v = 0.0;
    if (i0 >= 0 && i0 < z.nt) v += (1.0 - w) * z.at(i0, j);
    if (i0 + 1 >= 0 && i0 + 1 < z.nt) v += w * z.at(i0 + 1, j);
    return v;
}

}  // namespace detail

// Adjoint of the Radon transform between L^2(B_1(0)) and L^2(Z; w^{-1}),
// realized as the exact transpose of radon_apply under the midpoint
// quadrature inner products: each cell scatters w^{-1}(t) dt dtheta z along
// its line, divided by the pixel area. Consistent with
// R*[z](s) = int_0^pi z(xi(s,theta),theta) w^{-1}(xi) dtheta.
inline ImageGrid radon_adjoint(const SinogramGrid& z, int m) {
    ImageGrid out(m);
    const double cell = z.dt() * z.dtheta();
    const double inv_area = 1.0 / (out.spacing() * out.spacing());
    for (int i = 0; i < z.nt; ++i) {
        const double t = z.t_node(i);
        const double wfac = cell * inv_area / radon_weight(t);
        for (int j = 0; j < z.ntheta; ++j) {
            double zv = z.at(i, j);
            if (zv == 0.0) continue;
            detail::walk_line_pixels(out, t, z.theta_node(j), [&](int pi_, int pj, double len) {
                out.at(pi_, pj) += zv * wfac * len;
            });
        }
    }
    out.apply_disk_mask();
    return out;
}

// Pointwise evaluation of the same adjoint integral: midpoint in theta,
// linear interpolation in t, clipped on the outermost half cell where the
// weight blows up. Used as a cross-check of the transpose form.
inline ImageGrid radon_adjoint_interp(const SinogramGrid& z, int m) {
    ImageGrid out(m);
    const double dtheta = z.dtheta();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (!out.inside_disk(i, j)) continue;
            double s1 = out.center(i), s2 = out.center(j);
            double acc = 0.0;
            for (int q = 0; q < z.ntheta; ++q) {
                double theta = z.theta_node(q);
                double xi = s1 * std::cos(theta) + s2 * std::sin(theta);
                double v = detail::sinogram_interp_t(z, xi, q);
                if (v != 0.0) acc += v / radon_weight(xi);
            }
            out.at(i, j) = acc * dtheta;
        }
    }
    return out;
}

// Back-projection B[z](s) = (1/pi) int_0^pi z(<s,n(theta)>,theta) dtheta;
// differs from the adjoint by the absent weight and the 1/pi factor.
inline ImageGrid backprojection(const SinogramGrid& z, int m) {
    ImageGrid out(m);
    const double dtheta = z.dtheta();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (!out.inside_disk(i, j)) continue;
            double s1 = out.center(i), s2 = out.center(j);
            double acc = 0.0;
            for (int q = 0; q < z.ntheta; ++q) {
                double theta = z.theta_node(q);
                double xi = s1 * std::cos(theta) + s2 * std::sin(theta);
                acc += detail::sinogram_interp_t(z, xi, q);
            }
            out.at(i, j) = acc * dtheta / SinogramGrid::pi();
        }
    }
    return out;
}

// Chebyshev polynomial of the second kind, c_k(t) =
// sin((k+1) arccos t)/sin(arccos t); evaluated by the three-term recurrence,
// which takes the limit values +-(k+1) at t = +-1 automatically.
inline double chebyshev2(int k, double t) {
    if (k < 0) throw std::invalid_argument("chebyshev2: k must be >= 0");
    if (std::fabs(t) > 1.0) throw std::invalid_argument("chebyshev2: |t| must be <= 1");
    double prev = 1.0;          // c_0
    if (k == 0) return prev;
    double cur = 2.0 * t;       // c_1
    for (int i = 2; i <= k; ++i) {
        double next = 2.0 * t * cur - prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

// Planar spherical harmonics on [0,pi), orthonormal in L^2(0,pi):
// Y_0 = 1/sqrt(pi), Y_l = sqrt(2/pi) cos(l theta), Y_{-l} = sqrt(2/pi) sin(l theta).
inline double spherical_harmonic_2d(int idx, double theta) {
    constexpr double pi = 3.14159265358979323846;
    if (idx == 0) return 1.0 / std::sqrt(pi);
    const double c = std::sqrt(2.0 / pi);
    return idx > 0 ? c * std::cos(idx * theta) : c * std::sin(-idx * theta);
}

struct SingularTriple {
    int k = 0;
    int l = 0;
    double gamma = 0.0;
    SinogramGrid v;
    ImageGrid u;
};

// v_{k,l} = c_k w(t) c_k(t) Y_{k-2l}(theta) with the normalizer c_k obtained
// from midpoint quadrature of ||sqrt(w) c_k|| over (-1,1);
// u_{k,l} = (1/gamma_k) R*[v_{k,l}]. Since v is analytic, R*[v] is evaluated
// by direct theta-quadrature of c_k(xi(s,theta)) Y(theta) -- the w in v
// cancels the w^{-1} of the adjoint, leaving a smooth integrand.
inline std::vector<SingularTriple> analytic_singular_system(int kmax, int m, int nt, int ntheta) {
    if (kmax < 0) throw std::invalid_argument("analytic_singular_system: kmax must be >= 0");
    constexpr double pi = 3.14159265358979323846;
    std::vector<SingularTriple> out;
    SinogramGrid shape(nt, ntheta);
    const int nq = std::max(512, 4 * ntheta);
    const double dq = pi / nq;
    for (int k = 0; k <= kmax; ++k) {
        // ||sqrt(w) c_k||_{L^2(-1,1)} on the sinogram's own t nodes.
        double nrm2 = 0.0;
        for (int i = 0; i < nt; ++i) {
            double t = shape.t_node(i);
            double ck = chebyshev2(k, t);
            nrm2 += radon_weight(t) * ck * ck;
        }
        nrm2 *= shape.dt();
        const double normalizer = 1.0 / std::sqrt(nrm2);
        for (int l = 0; l <= k; ++l) {
            if ((k + l) % 2 != 0) continue;
            SingularTriple trip;
            trip.k = k;
            trip.l = l;
            trip.gamma = std::sqrt(2.0 * pi / (k + 1));
            trip.v = SinogramGrid(nt, ntheta);
            for (int i = 0; i < nt; ++i) {
                double t = shape.t_node(i);
                double radial = normalizer * radon_weight(t) * chebyshev2(k, t);
                for (int j = 0; j < ntheta; ++j)
                    trip.v.at(i, j) = radial * spherical_harmonic_2d(k - 2 * l, shape.theta_node(j));
            }
            trip.u = ImageGrid(m);
            const double scale = normalizer / trip.gamma;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    if (!trip.u.inside_disk(i, j)) continue;
                    double s1 = trip.u.center(i), s2 = trip.u.center(j);
                    double acc = 0.0;
                    for (int q = 0; q < nq; ++q) {
                        double theta = (q + 0.5) * dq;
                        double xi = s1 * std::cos(theta) + s2 * std::sin(theta);
                        acc += chebyshev2(k, xi) * spherical_harmonic_2d(k - 2 * l, theta);
                    }
                    trip.u.at(i, j) = scale * acc * dq;
                }
            out.push_back(std::move(trip));
        }
    }
    return out;
}

// Dense matrix of the discrete Radon transform between the Euclidean
// representations of L^2(B_1(0)) (masked pixels, scaled by sqrt(pixel area))
// and L^2(Z; w^{-1}) (cells scaled by sqrt(w^{-1} dt dtheta)). Its singular
// values approximate those of the continuous operator.
struct WeightedRadonMatrix {
    Matrix mat;                         // (nt*ntheta) x npix
    std::vector<std::pair<int, int>> pixels;  // masked pixel (i,j) per column
    int m = 0, nt = 0, ntheta = 0;
};

inline WeightedRadonMatrix assemble_weighted_radon_matrix(int m, int nt, int ntheta) {
    ImageGrid ref(m);
    WeightedRadonMatrix out;
    out.m = m; out.nt = nt; out.ntheta = ntheta;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (ref.inside_disk(i, j)) out.pixels.emplace_back(i, j);
    const std::size_t npix = out.pixels.size();
    SinogramGrid shape(nt, ntheta);
    out.mat = Matrix(static_cast<std::size_t>(nt) * ntheta, npix);
    const double pixel_scale = ref.spacing();  // sqrt of pixel area
    std::vector<std::size_t> column_of(static_cast<std::size_t>(m) * m, npix);
    for (std::size_t c = 0; c < npix; ++c)
        column_of[static_cast<std::size_t>(out.pixels[c].first) * m + out.pixels[c].second] = c;
    for (int i = 0; i < nt; ++i) {
        const double t = shape.t_node(i);
        const double data_scale = std::sqrt(shape.dt() * shape.dtheta() / radon_weight(t));
        for (int j = 0; j < ntheta; ++j) {
            const std::size_t row = static_cast<std::size_t>(i) * ntheta + j;
            detail::walk_line_pixels(ref, t, shape.theta_node(j), [&](int pi_, int pj, double len) {
                std::size_t col = column_of[static_cast<std::size_t>(pi_) * m + pj];
                if (col == npix) return;
                out.mat(row, col) += len * data_scale / pixel_scale;
            });
        }
    }
    return out;
}

// Singular values of the assembled weighted matrix, descending.
inline Vec discrete_radon_singular_values(const WeightedRadonMatrix& wrm, std::size_t count) {
    SymmetricEigen eig = eigen_symmetric(wrm.mat.gram());
    Vec sv;
    sv.reserve(count);
    for (std::size_t i = 0; i < eig.values.size() && i < count; ++i)
        sv.push_back(std::sqrt(std::max(0.0, eig.values[i])));
    return sv;
}

}  // namespace invreg
