#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "invreg/csv.hpp"
#include "invreg/iterative.hpp"
#include "invreg/oplearn.hpp"
#include "invreg/paramsel.hpp"
#include "invreg/problems.hpp"
#include "invreg/variational.hpp"

namespace invreg {

struct RateResult {
    std::vector<std::pair<double, double>> pairs;  // (delta or h, error), fitted legs only
    std::vector<std::pair<double, double>> excluded;
    double exponent = 0.0;
    double intercept = 0.0;
    double fit_residual = 0.0;
    double floor_error = 0.0;  // error of the noise-free sanity leg

    void fit() {
        if (pairs.size() < 3) throw std::invalid_argument("RateResult: need >= 3 fitted legs");
        RateFit f = fit_rate(pairs);
        exponent = f.exponent;
        intercept = f.intercept;
        double ss = 0.0;
        for (auto& [h, e] : pairs) {
            double r = std::log(e) - (intercept + exponent * std::log(h));
            ss += r * r;
        }
        fit_residual = std::sqrt(ss / pairs.size());
    }
};

namespace harness_detail {

// the standard c-example instance of the experiments: f and a smooth truth
inline CExampleProblem make_cexample(int n) {
    constexpr double pi = 3.14159265358979323846;
    return CExampleProblem(
        GridFunction1D::sample(n, [=](double s) { return 10.0 * pi * pi * std::sin(pi * s) + 5.0; }),
        n);
}

inline Vec cexample_truth(int n) {
    constexpr double pi = 3.14159265358979323846;
    return GridFunction1D::sample(n, [=](double s) { return 1.0 + 0.5 * std::sin(2.0 * pi * s); })
        .values;
}

inline AExampleProblem make_aexample(int n, double nu = 0.25) {
    constexpr double pi = 3.14159265358979323846;
    return AExampleProblem(
        GridFunction1D::sample(n, [=](double s) { return pi * pi * std::sin(pi * s); }), n, nu);
}

inline Vec aexample_coefficient(int n) {
    constexpr double pi = 3.14159265358979323846;
    return GridFunction1D::sample(n, [=](double s) { return 1.5 + 0.4 * std::cos(2.0 * pi * s); })
        .values;
}

inline std::function<double(const Vec&, const Vec&)> trapezoid_metric() {
    return [](const Vec& a, const Vec& b) { return trapezoid_inner(a, b); };
}

// median pairwise distance of the expert inputs in the problem's parameter
// norm; keeps the kernel Gram matrix away from the all-ones degeneracy
inline double median_expert_distance(const ExpertSet& experts, const ForwardProblem& problem) {
    std::vector<double> dists;
    for (std::size_t i = 0; i < experts.size(); ++i)
        for (std::size_t j = i + 1; j < experts.size(); ++j)
            dists.push_back(problem.param_norm(sub(experts.inputs[i], experts.inputs[j])));
    if (dists.empty()) return 1.0;
    std::sort(dists.begin(), dists.end());
    double med = dists[dists.size() / 2];
    return med > 1e-12 ? med : 1.0;
}

}  // namespace harness_detail

// Tikhonov convergence-rate experiment: with the source-condition prior and
// alpha = c delta, the error ||x_alpha^delta - xdag|| is fitted against delta.
// Legs within twice the measured noise-free floor are excluded from the fit.
inline RateResult run_rate_tikhonov(const FlatConfig& config, std::ostream* csv = nullptr) {
    constexpr double pi = 3.14159265358979323846;
    const int n = config.get_int("n", 128);
    const double alpha_factor = config.get_number("alpha_factor", 1.0);
    const std::uint64_t seed = static_cast<std::uint64_t>(config.get_number("seed", 11));
    std::vector<double> deltas =
        config.get_list("deltas", {1e-1, 1e-1 / std::sqrt(10.0), 1e-2, 1e-2 / std::sqrt(10.0),
                                   1e-3});
    if (deltas.size() < 3) throw std::invalid_argument("run_rate_tikhonov: need >= 3 noise levels");
    for (std::size_t i = 1; i < deltas.size(); ++i)
        if (!(deltas[i] < deltas[i - 1]))
            throw std::invalid_argument("run_rate_tikhonov: deltas must be strictly decreasing");

    CExampleProblem problem = harness_detail::make_cexample(n);
    Vec x_true = harness_detail::cexample_truth(n);
    auto z_profile =
        GridFunction1D::sample(n, [=](double s) { return 0.05 * std::sin(pi * s); });
    Vec x0 = construct_source_prior(problem, x_true, z_profile);
    Vec y = problem.apply(x_true);

    TikhonovConfig solver;
    solver.x0_prior = x0;
    solver.max_iterations = config.get_int("max_iterations", 50);
    solver.multistarts = config.get_int("multistarts", 2);
    solver.seed = seed;

    // noise-free sanity leg measures the discretization/optimizer floor
    RateResult result;
    {
        TikhonovConfig floor_cfg = solver;
        floor_cfg.alpha = alpha_factor * deltas.back() * 1e-3;
        auto [xf, repf] = tikhonov_minimize(problem, y, floor_cfg);
        result.floor_error = problem.param_norm(sub(xf, x_true));
    }

    if (csv) {
        *csv << hash_comment(config.hash());
        *csv << "delta,alpha,error,objective,excluded\n" << std::setprecision(17);
    }
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        double delta = deltas[i];
        GridFunction1D yg(n, y);
        Vec ydelta = add_noise(yg, NoiseSpec(delta, derive_seed(seed, i))).values;
        TikhonovConfig cfg = solver;
        cfg.alpha = alpha_factor * delta;
        auto [x, rep] = tikhonov_minimize(problem, ydelta, cfg);
        if (rep.line_search_failed)
            throw std::runtime_error("run_rate_tikhonov: solve failed, partial CSV emitted");
        double err = problem.param_norm(sub(x, x_true));
        bool exclude = err <= 2.0 * result.floor_error;
        if (exclude)
            result.excluded.push_back({delta, err});
        else
            result.pairs.push_back({delta, err});
        if (csv)
            *csv << delta << ',' << cfg.alpha << ',' << err << ',' << rep.objective << ','
                 << (exclude ? 1 : 0) << "\n";
    }
    result.fit();
    if (csv)
        *csv << "# fitted_exponent=" << result.exponent << " intercept=" << result.intercept
             << " floor=" << result.floor_error << "\n";
    return result;
}

// FEM self-convergence experiment: L^2 error against an n = 4096 reference
// for a fixed smooth coefficient, fitted against h = 1/n.
inline RateResult run_rate_fem(const FlatConfig& config, std::ostream* csv = nullptr) {
    const std::string which = config.get_string("problem", "cexample");
    std::vector<double> n_list_d = config.get_list("n_list", {16, 32, 64, 128});
    const int nref = config.get_int("reference_n", 4096);

    auto solve_at = [&](int n) -> Vec {
        if (which == "cexample") {
            CExampleProblem prob = harness_detail::make_cexample(n);
            Vec x = harness_detail::cexample_truth(n);
            return prob.apply(x);
        }
        if (which == "aexample") {
            AExampleProblem prob = harness_detail::make_aexample(n);
            Vec x = harness_detail::aexample_coefficient(n);
            return prob.apply(x);
        }
        throw std::invalid_argument("run_rate_fem: unknown problem " + which);
    };

    Vec reference = solve_at(nref);
    RateResult result;
    if (csv) {
        *csv << hash_comment(config.hash());
        *csv << "n,h,error\n" << std::setprecision(17);
    }
    for (double nd : n_list_d) {
        int n = static_cast<int>(nd);
        if (nref % n != 0) throw std::invalid_argument("run_rate_fem: reference_n must be a multiple");
        Vec coarse = solve_at(n);
        int stride = nref / n;
        Vec diff(coarse.size());
        for (int i = 0; i <= n; ++i)
            diff[i] = coarse[i] - reference[static_cast<std::size_t>(i) * stride];
        GridFunction1D err(n, diff);
        double e = norm_l2(err);
        if (e <= 1e-15) {
            result.excluded.push_back({1.0 / n, e});
            continue;
        }
        result.pairs.push_back({1.0 / n, e});
        if (csv) *csv << n << ',' << 1.0 / n << ',' << e << "\n";
    }
    result.fit();
    if (csv) *csv << "# fitted_exponent=" << result.exponent << "\n";
    return result;
}

struct HybridComparison {
    std::vector<double> deltas;
    Vec plain_errors;
    Vec hybrid_errors;
    Vec feature_residuals;  // |Fl[x] - zdelta| of the feature-mode run per delta
    double plain_exponent = 0.0;
    double hybrid_exponent = 0.0;
    bool envelope_ok = false;  // hybrid exponent >= 0.35 and error <= 1.5x plain at smallest delta
};

namespace harness_detail {

// averaging feature: x -> its mean value on [0,1] (trapezoid)
class MeanFeature : public ForwardProblem {
public:
    explicit MeanFeature(int n) : n_(n), weights_(trapezoid_weights(n)) {}
    std::size_t param_dim() const override { return static_cast<std::size_t>(n_) + 1; }
    std::size_t data_dim() const override { return 1; }
    Vec apply(const Vec& x) const override { return {dot(weights_, x)}; }
    Vec deriv(const Vec&, const Vec& h) const override { return {dot(weights_, h)}; }
    Vec deriv_adjoint(const Vec&, const Vec& w) const override {
        // adjoint of x -> <1, x>_X under the trapezoid metric is w * 1
        return Vec(param_dim(), w[0]);
    }
    double param_inner(const Vec& a, const Vec& b) const override { return trapezoid_inner(a, b); }

private:
    int n_;
    Vec weights_;
};

}  // namespace harness_detail

// Plain vs hybrid (vRKHS surrogate) Tikhonov across the noise list; the
// surrogate is trained on noise-free expert pairs near the truth.
inline HybridComparison run_hybrid_comparison(const FlatConfig& config, std::ostream* csv = nullptr) {
    constexpr double pi = 3.14159265358979323846;
    const int n = config.get_int("n", 64);
    const int n_experts = config.get_int("experts", 24);
    const double expert_spread = config.get_number("expert_spread", 0.05);
    const double alpha_factor = config.get_number("alpha_factor", 1.0);
    const std::uint64_t seed = static_cast<std::uint64_t>(config.get_number("seed", 21));
    std::vector<double> deltas =
        config.get_list("deltas", {1e-1, 1e-1 / std::sqrt(10.0), 1e-2, 1e-2 / std::sqrt(10.0)});

    CExampleProblem problem = harness_detail::make_cexample(n);
    Vec x_true = harness_detail::cexample_truth(n);
    auto z_profile = GridFunction1D::sample(n, [=](double s) { return 0.05 * std::sin(pi * s); });
    Vec x0 = construct_source_prior(problem, x_true, z_profile);
    Vec y = problem.apply(x_true);

    // expert pairs: smooth low-frequency perturbations of the truth
    SplitMix64 gen(derive_seed(seed, 1000));
    ExpertSet experts;
    for (int l = 0; l < n_experts; ++l) {
        Vec c(4);
        for (auto& v : c) v = gen.next_symmetric();
        Vec x(x_true);
        for (int i = 0; i <= n; ++i) {
            double s = static_cast<double>(i) / n;
            double bump = 0.0;
            for (int q = 0; q < 4; ++q) bump += c[q] * std::sin((q + 1) * pi * s) / (q + 1);
            x[i] = std::max(0.0, x[i] + expert_spread * bump);
        }
        experts.inputs.push_back(x);
        experts.outputs.push_back(problem.apply(x));
    }
    const double bandwidth =
        config.get_number("kernel_bandwidth", harness_detail::median_expert_distance(experts, problem));
    VRKHSModel surrogate =
        vrkhs_fit(std::move(experts), KernelSpec{KernelKind::gaussian, bandwidth, 1.0},
                  config.get_number("fit_alpha", 1e-6), harness_detail::trapezoid_metric(),
                  harness_detail::trapezoid_metric());

    harness_detail::MeanFeature feature(n);
    Vec z_true = feature.apply(x_true);

    HybridComparison out;
    out.deltas = deltas;
    if (csv) {
        *csv << hash_comment(config.hash());
        *csv << "delta,alpha,plain_error,hybrid_error,feature_residual\n" << std::setprecision(17);
    }
    std::vector<std::pair<double, double>> plain_pairs, hybrid_pairs;
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        double delta = deltas[i];
        GridFunction1D yg(n, y);
        Vec ydelta = add_noise(yg, NoiseSpec(delta, derive_seed(seed, i))).values;
        TikhonovConfig cfg;
        cfg.alpha = alpha_factor * delta;
        cfg.x0_prior = x0;
        cfg.multistarts = 2;
        cfg.seed = derive_seed(seed, 200 + i);
        auto [xp, rp] = tikhonov_minimize(problem, ydelta, cfg);
        HybridConfig hyb;
        hyb.alpha = cfg.alpha;
        hyb.kind = PriorKind::surrogate;  // lambda = alpha
        hyb.solver = cfg;
        auto [xh, rh] = hybrid_minimize(problem, surrogate, ydelta, ydelta, hyb);
        double pe = problem.param_norm(sub(xp, x_true));
        double he = problem.param_norm(sub(xh, x_true));
        out.plain_errors.push_back(pe);
        out.hybrid_errors.push_back(he);
        plain_pairs.push_back({delta, pe});
        hybrid_pairs.push_back({delta, he});

        // feature-mode leg: the averaging functional constrains the mean
        Vec zdelta = add_noise(z_true, NoiseSpec(0.1 * delta, derive_seed(seed, 400 + i)));
        HybridConfig fhyb;
        fhyb.alpha = cfg.alpha;
        fhyb.kind = PriorKind::feature;  // lambda = 1
        fhyb.solver = cfg;
        auto [xf, rf] = hybrid_minimize(problem, feature, ydelta, zdelta, fhyb);
        double fres = std::fabs(feature.apply(xf)[0] - zdelta[0]);
        out.feature_residuals.push_back(fres);
        if (csv)
            *csv << delta << ',' << cfg.alpha << ',' << pe << ',' << he << ',' << fres << "\n";
    }
    out.plain_exponent = fit_rate(plain_pairs).exponent;
    out.hybrid_exponent = fit_rate(hybrid_pairs).exponent;
    out.envelope_ok = out.hybrid_exponent >= 0.35 &&
                      out.hybrid_errors.back() <= 1.5 * out.plain_errors.back();
    if (csv)
        *csv << "# plain_exponent=" << out.plain_exponent
             << " hybrid_exponent=" << out.hybrid_exponent << " envelope_ok=" << out.envelope_ok
             << "\n";
    return out;
}

struct IterativeComparison {
    struct Row {
        std::string method;
        int k_star = 0;
        double final_residual = 0.0;
        double final_error = 0.0;
        StopReason reason = StopReason::max_iterations;
    };
    std::vector<Row> rows;
};

// Runs the classical and data-driven iterations on the c-example (or a
// diagonal closed-form problem) with shared seeds and emits stopping indices,
// final errors and residual trajectories.
inline IterativeComparison run_iterative_compare(const FlatConfig& config,
                                                 std::ostream* csv = nullptr) {
    constexpr double pi = 3.14159265358979323846;
    const std::string which = config.get_string("problem", "cexample");
    const int n = config.get_int("n", 32);
    const double delta_factor = config.get_number("delta_factor", 3e-4);
    const double tau = config.get_number("tau", 2.5);
    const std::uint64_t seed = static_cast<std::uint64_t>(config.get_number("seed", 31));
    const int max_iter = config.get_int("max_iterations", 100000);
    const int n_unsup = config.get_int("ensemble", 5);
    const double spread = config.get_number("ensemble_spread", 0.05);

    std::unique_ptr<ForwardProblem> owned;
    Vec x_true;
    Vec x0;
    if (which == "cexample") {
        owned = std::make_unique<CExampleProblem>(harness_detail::make_cexample(n));
        x_true = harness_detail::cexample_truth(n);
        x0.assign(x_true.size(), 1.0);
    } else if (which == "diag") {
        owned = std::make_unique<DiagonalOperator>(Vec{0.5});
        x_true = {2.0};
        x0 = {0.0};
    } else {
        throw std::invalid_argument("run_iterative_compare: unknown problem " + which);
    }
    const ForwardProblem& problem = *owned;
    Vec y = problem.apply(x_true);
    const double delta = delta_factor * problem.data_norm(y);
    Vec ydelta = y;
    {
        Vec dir = detail::noise_direction(y.size(), NoiseSpec(delta, derive_seed(seed, 0)),
                                          [&](const Vec& v) { return problem.data_norm(v); });
        ydelta = add(y, dir);
    }

    double L = estimate_deriv_norm(problem, x0, derive_seed(seed, 1));
    double scale = L > 1.0 ? 1.0 / (L * L) : 1.0;
    auto stop = StoppingRule::discrepancy_rule(tau, delta, max_iter);

    // unsupervised set: smooth perturbations of the truth
    SplitMix64 gen(derive_seed(seed, 2));
    std::vector<Vec> ensemble;
    for (int l = 0; l < n_unsup; ++l) {
        Vec x(x_true);
        if (which == "diag") {
            x[0] += spread * gen.next_symmetric();
        } else {
            Vec c(3);
            for (auto& v : c) v = gen.next_symmetric();
            for (int i = 0; i <= n; ++i) {
                double s = static_cast<double>(i) / n;
                double bump = 0.0;
                for (int q = 0; q < 3; ++q) bump += c[q] * std::sin((q + 1) * pi * s) / (q + 1);
                x[i] = std::max(0.0, x[i] + spread * bump);
            }
        }
        ensemble.push_back(std::move(x));
    }
    // supervised surrogate from the same ensemble; the kernel must see both
    // the cloud spacing and the starting point
    ExpertSet experts;
    Vec cloud_mean(x0.size(), 0.0);
    for (const Vec& x : ensemble) {
        experts.inputs.push_back(x);
        experts.outputs.push_back(problem.apply(x));
        cloud_mean = add(cloud_mean, x);
    }
    cloud_mean = scaled(cloud_mean, 1.0 / ensemble.size());
    double start_dist = problem.param_norm(sub(x0, cloud_mean));
    const double bandwidth = config.get_number(
        "kernel_bandwidth",
        std::max(harness_detail::median_expert_distance(experts, problem), start_dist));
    auto metric = [&problem](const Vec& a, const Vec& b) { return problem.param_inner(a, b); };
    VRKHSModel surrogate = vrkhs_fit(std::move(experts),
                                     KernelSpec{KernelKind::gaussian, bandwidth, 1.0},
                                     config.get_number("fit_alpha", 1e-3), metric, metric);
    // the data-driven pull gets the same normalization treatment as the
    // physics term: fold 1/||Fl'||^2 into its weight
    double Lf = estimate_deriv_norm(surrogate, x0, derive_seed(seed, 4));
    double sup_scale = Lf > 1.0 ? 1.0 / (Lf * Lf) : 1.0;

    Vec mu = geometric_schedule(0.5, 0.5, 64);
    Vec sup_mu = geometric_schedule(0.5 * sup_scale, 0.5, 64);
    Vec alphas = geometric_schedule(1.0, 0.5, 64);

    IterativeComparison out;
    if (csv) {
        *csv << hash_comment(config.hash());
        *csv << "method,k,residual,error,mu_or_alpha\n" << std::setprecision(17);
    }
    auto record = [&](const std::string& method, const std::pair<Vec, IterationLog>& run) {
        const auto& [x, log] = run;
        IterativeComparison::Row row;
        row.method = method;
        row.k_star = log.stopping_index();
        row.final_residual = log.records.back().residual;
        row.final_error = problem.param_norm(sub(x, x_true));
        row.reason = log.reason;
        out.rows.push_back(row);
        if (csv)
            for (const auto& rec : log.records)
                *csv << method << ',' << rec.k << ',' << rec.residual << ',' << rec.error << ','
                     << rec.step_value << "\n";
    };

    record("landweber", landweber(problem, ydelta, x0, stop, scale, &x_true));
    record("irgn", irgn(problem, ydelta, x0, x0, alphas, stop, 10.0, &x_true));
    record("irli2", two_step_irli(problem, ydelta, x0, x0, mu, stop, scale, &x_true));
    record("irli-weighted",
           irli_variant(problem, ydelta, x0, DataDrivenPrior::weighted_mean(ensemble), mu, stop,
                        false, scale, &x_true));
    record("irli-cyclic",
           irli_variant(problem, ydelta, x0, DataDrivenPrior::cyclic(ensemble), mu, stop, false,
                        scale, &x_true));
    record("irli-random",
           irli_variant(problem, ydelta, x0,
                        DataDrivenPrior::randomized(ensemble, derive_seed(seed, 3)), mu, stop,
                        false, scale, &x_true));
    record("irli-supervised",
           irli_variant(problem, ydelta, x0, DataDrivenPrior::supervised(surrogate), sup_mu, stop,
                        false, scale, &x_true));
    record("irgn-weighted",
           irgn_variant(problem, ydelta, x0, DataDrivenPrior::weighted_mean(ensemble), alphas,
                        stop, false, 10.0, &x_true));
    record("irgn-cyclic",
           irgn_variant(problem, ydelta, x0, DataDrivenPrior::cyclic(ensemble), alphas, stop,
                        false, 10.0, &x_true));
    record("irgn-random",
           irgn_variant(problem, ydelta, x0,
                        DataDrivenPrior::randomized(ensemble, derive_seed(seed, 3)), alphas, stop,
                        false, 10.0, &x_true));
    record("irgn-supervised",
           irgn_variant(problem, ydelta, x0, DataDrivenPrior::supervised(surrogate), sup_mu, stop,
                        false, 10.0, &x_true));
    return out;
}

}  // namespace invreg
