#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace invreg {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec axpy(double a, const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
    Vec r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = a * x[i] + y[i];
    return r;
}

inline Vec scaled(const Vec& x, double a) {
    Vec r(x);
    for (auto& v : r) v *= a;
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) { return axpy(-1.0, b, a); }
inline Vec add(const Vec& a, const Vec& b) { return axpy(1.0, b, a); }

// Row-major dense matrix.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Vec apply(const Vec& x) const {
        if (x.size() != cols_) throw std::invalid_argument("Matrix::apply: size mismatch");
        Vec y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            const double* row = &data_[i * cols_];
            for (std::size_t j = 0; j < cols_; ++j) s += row[j] * x[j];
            y[i] = s;
        }
        return y;
    }

    Vec apply_transposed(const Vec& y) const {
        if (y.size() != rows_) throw std::invalid_argument("Matrix::apply_transposed: size mismatch");
        Vec x(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double* row = &data_[i * cols_];
            for (std::size_t j = 0; j < cols_; ++j) x[j] += row[j] * y[i];
        }
        return x;
    }

    Matrix transposed() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix multiply(const Matrix& b) const {
        if (cols_ != b.rows_) throw std::invalid_argument("Matrix::multiply: size mismatch");
        Matrix c(rows_, b.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                double aik = (*this)(i, k);
                if (aik == 0.0) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    // A^T A, exploiting symmetry of the result.
    Matrix gram() const {
        Matrix g(cols_, cols_);
        for (std::size_t i = 0; i < rows_; ++i) {
            const double* row = &data_[i * cols_];
            for (std::size_t a = 0; a < cols_; ++a) {
                double ra = row[a];
                if (ra == 0.0) continue;
                for (std::size_t b = a; b < cols_; ++b) g(a, b) += ra * row[b];
            }
        }
        for (std::size_t a = 0; a < cols_; ++a)
            for (std::size_t b = 0; b < a; ++b) g(a, b) = g(b, a);
        return g;
    }

    Vec col(std::size_t j) const {
        Vec c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    void set_col(std::size_t j, const Vec& c) {
        for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

// Thomas algorithm for tridiagonal systems; diagonals given as
// (sub, diag, sup) with sub[0] and sup[n-1] unused.
inline Vec solve_tridiagonal(const Vec& sub, const Vec& diag, const Vec& sup, const Vec& rhs) {
    const std::size_t n = diag.size();
    if (sub.size() != n || sup.size() != n || rhs.size() != n)
        throw std::invalid_argument("solve_tridiagonal: size mismatch");
    Vec c(n), d(n);
    double beta = diag[0];
    if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
    c[0] = sup[0] / beta;
    d[0] = rhs[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
        beta = diag[i] - sub[i] * c[i - 1];
        if (beta == 0.0) throw std::runtime_error("solve_tridiagonal: zero pivot");
        c[i] = sup[i] / beta;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / beta;
    }
    Vec x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

// Gaussian elimination with partial pivoting. Throws on (numerically)
// singular systems.
inline Vec solve_dense(Matrix a, Vec b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_dense: size mismatch");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::fabs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(a(i, k)) > best) { best = std::fabs(a(i, k)); piv = i; }
        if (best < 1e-300) throw std::runtime_error("solve_dense: singular matrix");
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = a(i, k) / a(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    Vec x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a(i, j) * x[j];
        x[i] = s / a(i, i);
    }
    return x;
}

struct SymmetricEigen {
    Vec values;       // descending
    Matrix vectors;   // columns are eigenvectors, same ordering
};

// Cyclic Jacobi eigendecomposition for symmetric matrices.
inline SymmetricEigen eigen_symmetric(Matrix a, int max_sweeps = 64, double tol = 1e-14) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("eigen_symmetric: not square");
    Matrix v = Matrix::identity(n);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        double scale = 0.0;
        for (std::size_t p = 0; p < n; ++p) scale += a(p, p) * a(p, p);
        if (off <= tol * tol * (scale + 1e-300)) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                double app = a(p, p), aqq = a(q, q);
                double theta = 0.5 * (aqq - app) / apq;
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

struct Svd {
    Vec singular_values;  // descending
    Matrix u;             // rows x r
    Matrix v;             // cols x r
};

// SVD via the eigendecomposition of A^T A (or A A^T when rows < cols).
// Adequate for the moderately sized, moderately conditioned matrices this
// library assembles.
inline Svd svd(const Matrix& a) {
    const std::size_t m = a.rows(), n = a.cols();
    Svd out;
    if (m >= n) {
        SymmetricEigen eig = eigen_symmetric(a.gram());
        out.singular_values.resize(n);
        out.v = eig.vectors;
        out.u = Matrix(m, n);
        for (std::size_t j = 0; j < n; ++j) {
            double s = std::sqrt(std::max(0.0, eig.values[j]));
            out.singular_values[j] = s;
            Vec av = a.apply(eig.vectors.col(j));
            if (s > 1e-300) av = scaled(av, 1.0 / s);
            out.u.set_col(j, av);
        }
    } else {
        Svd t = svd(a.transposed());
        out.singular_values = t.singular_values;
        out.u = t.v;
        out.v = t.u;
    }
    return out;
}

// Moore-Penrose pseudoinverse with relative truncation of small singular
// values.
inline Matrix pseudoinverse(const Matrix& a, double rel_tol = 1e-12) {
    Svd s = svd(a);
    const std::size_t r = s.singular_values.size();
    double smax = r ? s.singular_values[0] : 0.0;
    Matrix pinv(a.cols(), a.rows());
    for (std::size_t k = 0; k < r; ++k) {
        double sv = s.singular_values[k];
        if (sv <= rel_tol * smax || sv <= 0.0) continue;
        double inv = 1.0 / sv;
        for (std::size_t i = 0; i < a.cols(); ++i) {
            double vik = s.v(i, k) * inv;
            if (vik == 0.0) continue;
            for (std::size_t j = 0; j < a.rows(); ++j) pinv(i, j) += vik * s.u(j, k);
        }
    }
    return pinv;
}

}  // namespace invreg
