#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "invreg/problems.hpp"

using namespace invreg;

constexpr double pi = 3.14159265358979323846;

namespace {

Vec sample_grid(int n, double (*f)(double)) {
    return GridFunction1D::sample(n, f).values;
}

double max_abs_diff(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

// |<F'h, w> - <h, F'*w>| / (||h|| ||w||) over seeded draws.
double adjoint_gap(const ForwardProblem& prob, const Vec& x, std::uint64_t seed) {
    SplitMix64 gen(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Vec h = gen.symmetric_vector(prob.param_dim());
        Vec w = gen.symmetric_vector(prob.data_dim());
        double lhs = prob.data_inner(prob.deriv(x, h), w);
        double rhs = prob.param_inner(h, prob.deriv_adjoint(x, w));
        double scale = prob.param_norm(h) * prob.data_norm(w);
        worst = std::max(worst, std::fabs(lhs - rhs) / scale);
    }
    return worst;
}

}  // namespace

TEST_CASE("c-example reproduces -y''=f analytically") {
    const int n = 256;
    CExampleProblem prob(GridFunction1D::sample(n, [](double s) { return pi * pi * std::sin(pi * s); }), n);
    Vec x(static_cast<std::size_t>(n) + 1, 0.0);
    Vec y = prob.apply(x);
    Vec exact = sample_grid(n, [](double s) { return std::sin(pi * s); });
    CHECK(max_abs_diff(y, exact) <= 5e-4);
}

TEST_CASE("c-example zero source gives zero solution") {
    const int n = 32;
    CExampleProblem prob(GridFunction1D::constant(n, 0.0), n);
    Vec x(static_cast<std::size_t>(n) + 1, 0.5);
    Vec y = prob.apply(x);
    CHECK(norm2(y) == 0.0);
}

TEST_CASE("c-example with constant reaction x=3") {
    const int n = 256;
    CExampleProblem prob(
        GridFunction1D::sample(n, [](double s) { return (pi * pi + 3.0) * std::sin(pi * s); }), n);
    Vec x(static_cast<std::size_t>(n) + 1, 3.0);
    Vec y = prob.apply(x);
    GridFunction1D err(n, sub(y, sample_grid(n, [](double s) { return std::sin(pi * s); })));
    CHECK(norm_l2(err) <= 1e-3);
}

TEST_CASE("c-example rejects negative x") {
    const int n = 16;
    CExampleProblem prob(GridFunction1D::constant(n, 1.0), n);
    Vec x(static_cast<std::size_t>(n) + 1, 0.0);
    x[4] = -0.5;
    CHECK_THROWS_AS(prob.apply(x), std::domain_error);
    CHECK_NOTHROW(prob.apply(prob.project_domain(x)));
}

TEST_CASE("c-example derivative: linearity, finite differences, adjoint") {
    const int n = 64;
    CExampleProblem prob(GridFunction1D::sample(n, [](double s) { return 1.0 + s; }), n);
    Vec x = sample_grid(n, [](double s) { return 1.0 + 0.5 * std::sin(2 * pi * s); });

    Vec zero(static_cast<std::size_t>(n) + 1, 0.0);
    CHECK(norm2(prob.deriv(x, zero)) == 0.0);

    // directional finite difference
    Vec h = sample_grid(n, [](double s) { return std::cos(pi * s); });
    const double eps = 1e-5;
    Vec fd = scaled(sub(prob.apply(axpy(eps, h, x)), prob.apply(x)), 1.0 / eps);
    Vec an = prob.deriv(x, h);
    GridFunction1D gap(n, sub(fd, an));
    GridFunction1D ref(n, an);
    CHECK(norm_l2(gap) / norm_l2(ref) <= 1e-3);

    CHECK(adjoint_gap(prob, x, 99) <= 1e-8);
}

TEST_CASE("a-example reproduces -y''=f for x=1") {
    const int n = 256;
    AExampleProblem prob(GridFunction1D::sample(n, [](double s) { return pi * pi * std::sin(pi * s); }),
                         n, 0.1);
    Vec x(static_cast<std::size_t>(n) + 1, 1.0);
    Vec y = prob.apply(x);
    GridFunction1D err(n, sub(y, sample_grid(n, [](double s) { return std::sin(pi * s); })));
    CHECK(norm_l2(err) <= 1e-3);
}

TEST_CASE("a-example zero source and domain guard") {
    const int n = 32;
    AExampleProblem prob(GridFunction1D::constant(n, 0.0), n, 0.5);
    Vec x(static_cast<std::size_t>(n) + 1, 1.0);
    CHECK(norm2(prob.apply(x)) == 0.0);

    Vec bad = x;
    bad[7] = 0.2;  // below nu
    CHECK_THROWS_AS(prob.apply(bad), std::domain_error);
    Vec fixed = prob.project_domain(bad);
    CHECK(fixed[7] == 0.5);
}

TEST_CASE("a-example derivative finite differences and adjoint") {
    const int n = 64;
    AExampleProblem prob(GridFunction1D::sample(n, [](double s) { return std::sin(pi * s); }), n, 0.25);
    Vec x = sample_grid(n, [](double s) { return 1.0 + 0.3 * std::cos(2 * pi * s); });

    Vec h = sample_grid(n, [](double s) { return s * (1.0 - s); });
    const double eps = 1e-5;
    Vec fd = scaled(sub(prob.apply(axpy(eps, h, x)), prob.apply(x)), 1.0 / eps);
    Vec an = prob.deriv(x, h);
    GridFunction1D gap(n, sub(fd, an));
    GridFunction1D ref(n, an);
    CHECK(norm_l2(gap) / norm_l2(ref) <= 1e-3);

    CHECK(adjoint_gap(prob, x, 123) <= 1e-8);
}

TEST_CASE("projection is idempotent and fixes admissible points") {
    const int n = 16;
    CExampleProblem cprob(GridFunction1D::constant(n, 1.0), n);
    SplitMix64 gen(5);
    Vec x = gen.symmetric_vector(n + 1);
    Vec p1 = cprob.project_domain(x);
    Vec p2 = cprob.project_domain(p1);
    CHECK(p1 == p2);
    Vec ok(static_cast<std::size_t>(n) + 1, 0.7);
    CHECK(cprob.project_domain(ok) == ok);
}

TEST_CASE("FEM self-convergence rate is quadratic") {
    auto reference = [](int n) {
        CExampleProblem prob(
            GridFunction1D::sample(n, [](double s) { return std::exp(s) * (1.0 + pi * pi * std::sin(pi * s)); }),
            n);
        Vec x = sample_grid(n, [](double s) { return 2.0 + std::cos(2 * pi * s); });
        return prob.apply(x);
    };
    const int nref = 4096;
    Vec ref = reference(nref);
    std::vector<std::pair<double, double>> pairs;
    for (int n : {16, 32, 64, 128}) {
        Vec coarse = reference(n);
        // reference restricted to the coarse nodes
        Vec diff(coarse.size());
        int stride = nref / n;
        for (int i = 0; i <= n; ++i) diff[i] = coarse[i] - ref[static_cast<std::size_t>(i) * stride];
        GridFunction1D err(n, diff);
        pairs.push_back({1.0 / n, norm_l2(err)});
    }
    auto fit = fit_rate(pairs);
    CHECK(fit.exponent == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("tangential-cone ratio shrinks with the perturbation") {
    const int n = 64;
    CExampleProblem prob(GridFunction1D::sample(n, [](double s) { return 1.0 + std::sin(pi * s); }), n);
    Vec x = sample_grid(n, [](double s) { return 1.5 + 0.5 * std::sin(2 * pi * s); });
    Vec dir = sample_grid(n, [](double s) { return std::cos(3 * pi * s); });

    auto cone_ratio = [&](double scale) {
        Vec xt = axpy(scale, dir, x);
        Vec fx = prob.apply(x), fxt = prob.apply(xt);
        Vec lin = prob.deriv(x, sub(x, xt));
        Vec lhs = sub(sub(fx, fxt), lin);
        Vec den = sub(fx, fxt);
        return prob.data_norm(lhs) / prob.data_norm(den);
    };

    double r1 = cone_ratio(0.5);
    double r2 = cone_ratio(0.05);
    double r3 = cone_ratio(0.005);
    CHECK(std::isfinite(r1));
    CHECK(r2 < r1);
    CHECK(r3 < r2);
}

TEST_CASE("diagonal closed-form Tikhonov oracle") {
    DiagonalOperator op(Vec{1.0});
    CHECK(diagonal_tikhonov_exact(op, Vec{1.0}, Vec{0.0}, 1.0)[0] == doctest::Approx(0.5));

    DiagonalOperator op2(Vec{2.0, 0.5});
    Vec x0{0.3, -0.2};
    Vec huge = diagonal_tikhonov_exact(op2, Vec{1.0, 1.0}, x0, 1e12);
    CHECK(std::fabs(huge[0] - x0[0]) <= 1e-10);
    CHECK(std::fabs(huge[1] - x0[1]) <= 1e-10);

    DiagonalOperator null_op(Vec{0.0});
    CHECK(diagonal_tikhonov_exact(null_op, Vec{1.0}, Vec{0.0}, 0.5)[0] == 0.0);
    CHECK_THROWS_AS(diagonal_tikhonov_exact(op, Vec{1.0}, Vec{0.0}, 0.0), std::invalid_argument);
}

TEST_CASE("power iteration estimates the derivative norm") {
    DiagonalOperator op(Vec{0.3, 2.5, 1.0});
    Vec x0(3, 0.0);
    CHECK(estimate_deriv_norm(op, x0) == doctest::Approx(2.5).epsilon(1e-6));
}
