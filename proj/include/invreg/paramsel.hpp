#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invreg/linalg.hpp"
#include "invreg/oplearn.hpp"
#include "invreg/problems.hpp"

namespace invreg {

struct AlphaGrid {
    Vec values;  // strictly decreasing, positive

    explicit AlphaGrid(Vec v) : values(std::move(v)) { validate(); }

    static AlphaGrid geometric(double alpha_max, double ratio, int count) {
        if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("AlphaGrid: ratio in (0,1)");
        Vec v(count);
        double a = alpha_max;
        for (int i = 0; i < count; ++i, a *= ratio) v[i] = a;
        return AlphaGrid(std::move(v));
    }

    void validate() const {
        if (values.size() < 2) throw std::invalid_argument("AlphaGrid: need at least 2 values");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0)) throw std::invalid_argument("AlphaGrid: values must be > 0");
            if (i > 0 && !(values[i] < values[i - 1]))
                throw std::invalid_argument("AlphaGrid: values must be strictly decreasing");
        }
    }
};

struct AlphaDiagnostics {
    double alpha = 0.0;
    double residual = std::numeric_limits<double>::quiet_NaN();
    double xnorm = std::numeric_limits<double>::quiet_NaN();  // distance to the prior
    double score = std::numeric_limits<double>::quiet_NaN();  // rule-specific value
    bool solver_failed = false;
};

struct SelectionReport {
    double chosen_alpha = 0.0;
    std::size_t chosen_index = 0;
    std::string rule;
    std::vector<AlphaDiagnostics> diagnostics;  // in grid order
    bool fallback = false;        // morozov: no alpha qualified
    bool degenerate = false;      // gcv: flat score profile
    bool low_confidence = false;  // lcurve: flat curvature
    int warnings = 0;             // skipped / substituted solver failures
};

// Solver callback: given alpha and a warm start, return the regularized
// solution. Throwing marks the grid point as failed.
using TikhonovSolver = std::function<Vec(double alpha, const Vec& warm_start)>;

inline double apriori_alpha(double delta, double c) {
    if (!(delta > 0.0) || !(c > 0.0))
        throw std::invalid_argument("apriori_alpha: delta and c must be > 0");
    return c * delta;
}

// Largest grid alpha with ||F[x_alpha] - ydelta|| <= tau delta, solved
// descending with warm starts; falls back to the smallest alpha with a flag.
inline SelectionReport morozov_select(const ForwardProblem& problem, const Vec& ydelta,
                                      double delta, double tau, const AlphaGrid& grid,
                                      const TikhonovSolver& solver, const Vec& x0_prior) {
    if (!(tau >= 1.0)) throw std::invalid_argument("morozov_select: tau must be >= 1");
    grid.validate();
    SelectionReport report;
    report.rule = "morozov";
    Vec warm = x0_prior;
    for (double alpha : grid.values) {
        AlphaDiagnostics diag;
        diag.alpha = alpha;
        try {
            Vec x = solver(alpha, warm);
            warm = x;
            diag.residual = problem.data_norm(sub(problem.apply(x), ydelta));
            diag.xnorm = problem.param_norm(sub(x, x0_prior));
            diag.score = diag.residual;
        } catch (const std::exception&) {
            diag.solver_failed = true;
            ++report.warnings;
        }
        report.diagnostics.push_back(diag);
    }
    report.fallback = true;
    report.chosen_index = report.diagnostics.size() - 1;
    for (std::size_t i = 0; i < report.diagnostics.size(); ++i) {
        const auto& d = report.diagnostics[i];
        if (!d.solver_failed && d.residual <= tau * delta) {
            report.chosen_index = i;
            report.fallback = false;
            break;  // grid is descending: the first qualifying alpha is the largest
        }
    }
    report.chosen_alpha = grid.values[report.chosen_index];
    return report;
}

// Generalized cross validation for a linear operator with finite-dimensional
// data: psi(alpha) = ||F x_alpha - ydelta|| / rho(alpha) with
// rho(alpha) = (alpha/n) trace((alpha I + F* F)^{-1}); restricted to linear
// problems exactly as the method is derived.
inline SelectionReport gcv_select(const Matrix& op, const Vec& ydelta, const AlphaGrid& grid) {
    grid.validate();
    const std::size_t n = op.rows();
    if (ydelta.size() != n) throw std::invalid_argument("gcv_select: data size mismatch");
    Svd dec = svd(op);
    const std::size_t m = op.cols();
    // data coordinates in the left singular basis
    Vec uy(dec.singular_values.size());
    for (std::size_t j = 0; j < uy.size(); ++j) uy[j] = dot(dec.u.col(j), ydelta);
    double ynorm2 = dot(ydelta, ydelta);

    SelectionReport report;
    report.rule = "gcv";
    for (double alpha : grid.values) {
        AlphaDiagnostics diag;
        diag.alpha = alpha;
        // x_alpha in the right singular basis: c_j = s_j uy_j / (s_j^2 + alpha)
        double res2 = ynorm2;
        double xnorm2 = 0.0;
        double trace = 0.0;
        for (std::size_t j = 0; j < dec.singular_values.size(); ++j) {
            double s = dec.singular_values[j];
            double c = s * uy[j] / (s * s + alpha);
            xnorm2 += c * c;
            res2 += (s * c - uy[j]) * (s * c - uy[j]) - uy[j] * uy[j];
            trace += 1.0 / (s * s + alpha);
        }
        // singular values below the decomposition rank contribute 1/alpha
        trace += static_cast<double>(m - dec.singular_values.size()) / alpha;
        double rho = alpha / static_cast<double>(n) * trace;
        diag.residual = std::sqrt(std::max(0.0, res2));
        diag.xnorm = std::sqrt(xnorm2);
        diag.score = diag.residual / rho;
        report.diagnostics.push_back(diag);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < report.diagnostics.size(); ++i)
        if (report.diagnostics[i].score < report.diagnostics[best].score) best = i;
    double lo = report.diagnostics[best].score;
    double hi = lo;
    for (const auto& d : report.diagnostics) hi = std::max(hi, d.score);
    if (hi - lo <= 1e-12 * std::max(1.0, hi)) {
        report.degenerate = true;
        best = 0;  // smallest index on ties
    }
    report.chosen_index = best;
    report.chosen_alpha = grid.values[best];
    return report;
}

namespace detail {

// Menger curvature of three points.
inline double circumcircle_curvature(double x1, double y1, double x2, double y2, double x3,
                                     double y3) {
    double a = std::hypot(x2 - x1, y2 - y1);
    double b = std::hypot(x3 - x2, y3 - y2);
    double c = std::hypot(x3 - x1, y3 - y1);
    double area2 = std::fabs((x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1));
    double denom = a * b * c;
    if (denom <= 1e-300) return 0.0;
    return 2.0 * area2 / denom;
}

}  // namespace detail

// L-curve: maximal discrete curvature of (log residual, log distance-to-prior)
// along the grid, curvature estimated by the circumcircle of consecutive
// triples.
inline SelectionReport lcurve_select(const ForwardProblem& problem, const Vec& ydelta,
                                     const AlphaGrid& grid, const TikhonovSolver& solver,
                                     const Vec& x0_prior) {
    grid.validate();
    if (grid.values.size() < 5) throw std::invalid_argument("lcurve_select: need at least 5 alphas");
    SelectionReport report;
    report.rule = "lcurve";
    Vec warm = x0_prior;
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        AlphaDiagnostics diag;
        diag.alpha = grid.values[i];
        try {
            Vec x = solver(grid.values[i], warm);
            warm = x;
            diag.residual = problem.data_norm(sub(problem.apply(x), ydelta));
            diag.xnorm = problem.param_norm(sub(x, x0_prior));
            usable.push_back(i);
        } catch (const std::exception&) {
            diag.solver_failed = true;
            ++report.warnings;
        }
        report.diagnostics.push_back(diag);
    }
    if (usable.size() < 5) throw std::runtime_error("lcurve_select: fewer than 5 usable points");
    const double floor_val = 1e-300;
    auto lg = [&](double v) { return std::log(std::max(v, floor_val)); };
    // The corner turns clockwise when the curve is walked in descending
    // alpha; bends of the opposite orientation (the data-fit and
    // regularization tails) are not corner candidates.
    double best_kappa = -1.0;
    double best_any = -1.0;
    std::size_t best = usable[usable.size() / 2];
    std::size_t best_fallback = best;
    for (std::size_t q = 1; q + 1 < usable.size(); ++q) {
        const auto& a = report.diagnostics[usable[q - 1]];
        const auto& b = report.diagnostics[usable[q]];
        const auto& c = report.diagnostics[usable[q + 1]];
        double x1 = lg(a.residual), y1 = lg(a.xnorm);
        double x2 = lg(b.residual), y2 = lg(b.xnorm);
        double x3 = lg(c.residual), y3 = lg(c.xnorm);
        double kappa = detail::circumcircle_curvature(x1, y1, x2, y2, x3, y3);
        double cross = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1);
        report.diagnostics[usable[q]].score = cross < 0.0 ? kappa : -kappa;
        if (cross < 0.0 && kappa > best_kappa) {
            best_kappa = kappa;
            best = usable[q];
        }
        if (kappa > best_any) {
            best_any = kappa;
            best_fallback = usable[q];
        }
    }
    if (best_kappa <= 1e-6) {
        report.low_confidence = true;
        if (best_kappa < 0.0) best = best_fallback;  // no corner-oriented triple at all
    }
    report.chosen_index = best;
    report.chosen_alpha = grid.values[best];
    return report;
}

inline void save_selection_report_csv(std::ostream& os, const SelectionReport& report) {
    os << "alpha,residual,xnorm,score\n" << std::setprecision(17);
    for (const auto& d : report.diagnostics)
        os << d.alpha << ',' << d.residual << ',' << d.xnorm << ',' << d.score << "\n";
    os << "# chosen_alpha=" << report.chosen_alpha << " rule=" << report.rule
       << " fallback=" << report.fallback << " degenerate=" << report.degenerate
       << " low_confidence=" << report.low_confidence << "\n";
}

inline SelectionReport load_selection_report_csv(std::istream& is) {
    SelectionReport report;
    std::string line;
    if (!std::getline(is, line) || line.rfind("alpha,residual,xnorm,score", 0) != 0)
        throw std::invalid_argument("selection csv: bad header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream meta(line.substr(1));
            std::string token;
            while (meta >> token) {
                auto eq = token.find('=');
                if (eq == std::string::npos) continue;
                std::string key = token.substr(0, eq), value = token.substr(eq + 1);
                if (key == "chosen_alpha") report.chosen_alpha = std::stod(value);
                else if (key == "rule") report.rule = value;
                else if (key == "fallback") report.fallback = value == "1";
                else if (key == "degenerate") report.degenerate = value == "1";
                else if (key == "low_confidence") report.low_confidence = value == "1";
            }
            continue;
        }
        std::istringstream ls(line);
        std::string item;
        Vec row;
        while (std::getline(ls, item, ',')) row.push_back(std::stod(item));
        if (row.size() != 4) throw std::invalid_argument("selection csv: bad row");
        AlphaDiagnostics d;
        d.alpha = row[0];
        d.residual = row[1];
        d.xnorm = row[2];
        d.score = row[3];
        report.diagnostics.push_back(d);
    }
    for (std::size_t i = 0; i < report.diagnostics.size(); ++i)
        if (report.diagnostics[i].alpha == report.chosen_alpha) report.chosen_index = i;
    return report;
}

// Empirical risk over an expert set: for each grid alpha solve the Tikhonov
// problem per expert datum and average the losses against the known inputs.
// A failed solve contributes the loss of the prior, with a warning.
inline SelectionReport empirical_risk_select(
    const ForwardProblem& problem, const ExpertSet& experts, const AlphaGrid& grid,
    const std::function<Vec(double alpha, const Vec& data, const Vec& warm)>& solver,
    const Vec& x0_prior,
    const std::function<double(const Vec&, const Vec&)>& loss = nullptr) {
    grid.validate();
    experts.validate();
    auto loss_fn = loss ? loss : [&](const Vec& a, const Vec& b) {
        Vec d = sub(a, b);
        return problem.param_inner(d, d);
    };
    SelectionReport report;
    report.rule = "erm";
    for (double alpha : grid.values) {
        AlphaDiagnostics diag;
        diag.alpha = alpha;
        double risk = 0.0;
        for (std::size_t l = 0; l < experts.size(); ++l) {
            Vec x;
            try {
                x = solver(alpha, experts.outputs[l], x0_prior);
            } catch (const std::exception&) {
                x = x0_prior;
                ++report.warnings;
            }
            risk += loss_fn(experts.inputs[l], x);
        }
        diag.score = risk / static_cast<double>(experts.size());
        report.diagnostics.push_back(diag);
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < report.diagnostics.size(); ++i)
        if (report.diagnostics[i].score < report.diagnostics[best].score) best = i;
    report.chosen_index = best;
    report.chosen_alpha = grid.values[best];
    return report;
}

}  // namespace invreg
