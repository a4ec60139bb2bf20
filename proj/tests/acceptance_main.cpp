// Acceptance suite: one pass/fail line per criterion, pinned tolerances.
// Usage: acceptance <path-to-invreg-cli>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "invreg/csv.hpp"
#include "invreg/harness.hpp"
#include "invreg/nnfun.hpp"
#include "invreg/oplearn.hpp"
#include "invreg/paramsel.hpp"
#include "invreg/radon.hpp"
#include "invreg/variational.hpp"

using namespace invreg;

namespace {

constexpr double pi = 3.14159265358979323846;

std::string g_cli_path;
int g_failures = 0;

struct Criterion {
    int number;
    std::string name;
    double budget_seconds;
    std::vector<std::string> problems;

    void fail(const std::string& why) { problems.push_back(why); }

    template <class Fn>
    void run(Fn&& body) {
        auto start = std::chrono::steady_clock::now();
        try {
            body(*this);
        } catch (const std::exception& e) {
            fail(std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > budget_seconds) {
            std::ostringstream os;
            os << "runtime " << secs << "s exceeds budget " << budget_seconds << "s";
            fail(os.str());
        }
        if (problems.empty()) {
            std::printf("[PASS] criterion %2d: %s (%.1fs)\n", number, name.c_str(), secs);
        } else {
            std::printf("[FAIL] criterion %2d: %s (%.1fs)\n", number, name.c_str(), secs);
            for (const auto& p : problems) std::printf("       - %s\n", p.c_str());
            ++g_failures;
        }
        std::fflush(stdout);
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

void criterion1_radon_svd(Criterion& c) {
    const std::string out = "acc_radon_svd.csv";
    if (run_cli("radon-svd --kmax 7 --m 32 --nt 64 --ntheta 64 --out " + out) != 0) {
        c.fail("radon-svd CLI returned nonzero");
        return;
    }
    std::ifstream in(out);
    std::string line;
    std::getline(in, line);  // hash
    std::getline(in, line);  // header
    std::vector<int> count_per_k(8, 0);
    int rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string item;
        std::vector<double> vals;
        while (std::getline(ls, item, ',')) vals.push_back(std::stod(item));
        if (vals.size() != 5) { c.fail("bad row width"); return; }
        int k = static_cast<int>(vals[0]);
        double ga = vals[2], gn = vals[3];
        if (k >= 0 && k < 8) ++count_per_k[k];
        if (std::fabs(gn - ga) > 0.10 * ga) {
            std::ostringstream os;
            os << "k=" << k << " l=" << vals[1] << ": numeric " << gn << " vs analytic " << ga;
            c.fail(os.str());
        }
        ++rows;
    }
    if (rows != 20) c.fail("expected 20 triples for kmax=7");
    const int expected[8] = {1, 1, 2, 2, 3, 3, 4, 4};
    for (int k = 0; k < 8; ++k)
        if (count_per_k[k] != expected[k]) {
            std::ostringstream os;
            os << "multiplicity at k=" << k << " is " << count_per_k[k] << ", want " << expected[k];
            c.fail(os.str());
        }
}

void criterion2_adjoints(Criterion& c) {
    auto probe_pde = [&](const ForwardProblem& prob, const Vec& x, std::uint64_t seed,
                         const std::string& label) {
        SplitMix64 gen(seed);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            Vec h = gen.symmetric_vector(prob.param_dim());
            Vec w = gen.symmetric_vector(prob.data_dim());
            double lhs = prob.data_inner(prob.deriv(x, h), w);
            double rhs = prob.param_inner(h, prob.deriv_adjoint(x, w));
            worst = std::max(worst, std::fabs(lhs - rhs) / (prob.param_norm(h) * prob.data_norm(w)));
        }
        if (worst > 1e-8) c.fail(label + " adjoint gap " + std::to_string(worst));
    };
    const int n = 64;
    CExampleProblem cp(GridFunction1D::sample(n, [](double s) { return 1.0 + s; }), n);
    probe_pde(cp, GridFunction1D::sample(n, [](double s) { return 1.0 + 0.5 * std::sin(2 * pi * s); }).values,
              101, "c-example");
    AExampleProblem ap(GridFunction1D::sample(n, [](double s) { return std::sin(pi * s); }), n, 0.25);
    probe_pde(ap, GridFunction1D::sample(n, [](double s) { return 1.0 + 0.3 * std::cos(2 * pi * s); }).values,
              102, "a-example");

    const int m = 48, nt = 96, ntheta = 96;
    SplitMix64 gen(103);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        ImageGrid x(m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                if (x.inside_disk(i, j)) x.at(i, j) = gen.next_symmetric();
        SinogramGrid z(nt, ntheta);
        for (auto& v : z.values) v = gen.next_symmetric();
        SinogramGrid rx = radon_apply(x, nt, ntheta);
        ImageGrid rz = radon_adjoint(z, m);
        double lhs = weighted_radon_inner(rx, z);
        double rhs = x.inner(rz);
        worst = std::max(worst, std::fabs(lhs - rhs) / (std::fabs(lhs) + std::fabs(rhs)));
    }
    if (worst > 1e-2) c.fail("radon adjoint gap " + std::to_string(worst));
}

void criterion3_fem_rate(Criterion& c) {
    RateResult rc = run_rate_fem(FlatConfig::parse("problem = cexample\n"));
    if (std::fabs(rc.exponent - 2.0) > 0.3)
        c.fail("c-example exponent " + std::to_string(rc.exponent));
    RateResult ra = run_rate_fem(FlatConfig::parse("problem = aexample\n"));
    if (std::fabs(ra.exponent - 2.0) > 0.3)
        c.fail("a-example exponent " + std::to_string(ra.exponent));
}

void criterion4_tikhonov_rate(Criterion& c) {
    auto cfg = FlatConfig::parse("n = 128\nseed = 11\ndeltas = [1e-1, 3.1622776601683794e-2, 1e-2, 3.1622776601683793e-3]\n");
    RateResult r = run_rate_tikhonov(cfg);
    if (std::fabs(r.exponent - 0.5) > 0.15) c.fail("fitted exponent " + std::to_string(r.exponent));
    if (r.pairs.size() < 3) c.fail("too few fitted legs");
}

void criterion5_oracles(Criterion& c) {
    SplitMix64 gen(501);
    double worst_tik = 0.0, worst_irgn = 0.0, worst_hyb = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t dim = 1 + gen.next_u64() % 8;
        Vec sigma(dim), y(dim), x0(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            sigma[i] = 2.0 * gen.next_double();
            y[i] = gen.next_symmetric();
            x0[i] = gen.next_symmetric();
        }
        double alpha = 0.05 + 2.0 * gen.next_double();
        DiagonalOperator op(sigma);
        Vec exact = diagonal_tikhonov_exact(op, y, x0, alpha);

        TikhonovConfig cfg;
        cfg.alpha = alpha;
        cfg.x0_prior = x0;
        auto [xt, rt] = tikhonov_minimize(op, y, cfg);
        for (std::size_t i = 0; i < dim; ++i)
            worst_tik = std::max(worst_tik, std::fabs(xt[i] - exact[i]));

        auto [xg, rg] = irgn(op, y, x0, x0, Vec{alpha}, StoppingRule::max_iter_rule(1));
        for (std::size_t i = 0; i < dim; ++i)
            worst_irgn = std::max(worst_irgn, std::fabs(xg[i] - exact[i]));

        HybridConfig hyb;
        hyb.alpha = alpha;
        hyb.lambda = 0.0;
        hyb.solver = cfg;
        auto [xh, rh] = hybrid_minimize(op, op, y, y, hyb);
        for (std::size_t i = 0; i < dim; ++i)
            worst_hyb = std::max(worst_hyb, std::fabs(xh[i] - exact[i]));
    }
    if (worst_tik > 1e-8) c.fail("tikhonov_minimize gap " + std::to_string(worst_tik));
    if (worst_irgn > 1e-8) c.fail("irgn one-step gap " + std::to_string(worst_irgn));
    if (worst_hyb > 1e-8) c.fail("hybrid lambda=0 gap " + std::to_string(worst_hyb));
}

void criterion6_landweber(Criterion& c) {
    const int n = 32;
    CExampleProblem prob(
        GridFunction1D::sample(n, [](double s) { return 10.0 * pi * pi * std::sin(pi * s); }), n);
    Vec xt = GridFunction1D::sample(n, [](double s) { return 1.0 + 0.4 * std::sin(2 * pi * s); }).values;
    Vec y = prob.apply(xt);
    double delta = 3e-4 * prob.data_norm(y);
    GridFunction1D yg(n, y);
    Vec ydelta = add_noise(yg, NoiseSpec(delta, 77)).values;
    Vec x0(prob.param_dim(), 1.0);
    double L = estimate_deriv_norm(prob, x0);
    double scale = 1.0 / (L * L);
    const double tau = 2.5;
    auto [x, log] =
        landweber(prob, ydelta, x0, StoppingRule::discrepancy_rule(tau, delta, 500000), scale, &xt);
    if (log.reason != StopReason::discrepancy) {
        c.fail("discrepancy stop not reached");
        return;
    }
    std::vector<std::pair<Vec, Vec>> pairs = {{x0, xt}, {x, xt}, {x0, x}};
    double eta = measure_eta_cone(prob, pairs);
    double threshold = 2.0 * (1.0 + eta) / (1.0 - 2.0 * eta) * delta;
    for (std::size_t i = 0; i + 1 < log.records.size(); ++i)
        if (log.records[i].residual > threshold &&
            log.records[i + 1].error > log.records[i].error + 1e-12) {
            c.fail("error increased at k=" + std::to_string(i));
            break;
        }
    double bound = landweber_stop_bound(tau, eta, std::pow(prob.param_norm(sub(x0, xt)), 2));
    double lhs = log.stopping_index() * std::pow(tau * delta, 2);
    if (!(lhs <= bound)) {
        std::ostringstream os;
        os << "stopping bound violated: k*(tau delta)^2 = " << lhs << " > " << bound
           << " (eta_cone = " << eta << ")";
        c.fail(os.str());
    }
}

void criterion7_operator_learning(Criterion& c) {
    SplitMix64 gen(701);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        Matrix a(4, 4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) a(i, j) = gen.next_symmetric() + (i == j ? 1.0 : 0.0);
        ExpertSet experts;
        for (int l = 0; l < 4; ++l) {
            Vec x = gen.symmetric_vector(4);
            experts.inputs.push_back(x);
            experts.outputs.push_back(a.apply(x));
        }
        auto est = bi_orthonormalize_svd(experts);
        Svd direct = svd(a);
        for (std::size_t j = 0; j < 4; ++j)
            worst = std::max(worst, std::fabs(est[j].value - direct.singular_values[j]));
    }
    if (worst > 1e-8) c.fail("bi-orthonormalization vs direct SVD gap " + std::to_string(worst));

    // Radon top singular value from smoothed random experts
    auto wrm = assemble_weighted_radon_matrix(24, 48, 48);
    const std::size_t npix = wrm.pixels.size();
    const int m = 24;
    std::vector<int> colof(static_cast<std::size_t>(m) * m, -1);
    for (std::size_t q = 0; q < npix; ++q)
        colof[static_cast<std::size_t>(wrm.pixels[q].first) * m + wrm.pixels[q].second] =
            static_cast<int>(q);
    auto smooth = [&](Vec v) {
        for (int r = 0; r < 8; ++r) {
            Vec nv = v;
            for (std::size_t q = 0; q < npix; ++q) {
                auto [i, j] = wrm.pixels[q];
                double acc = v[q];
                int cnt = 1;
                int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
                for (auto& t : nb) {
                    if (t[0] < 0 || t[1] < 0 || t[0] >= m || t[1] >= m) continue;
                    int cc = colof[static_cast<std::size_t>(t[0]) * m + t[1]];
                    if (cc >= 0) { acc += v[cc]; ++cnt; }
                }
                nv[q] = acc / cnt;
            }
            v = nv;
        }
        return v;
    };
    ExpertSet radon_experts;
    for (int l = 0; l < 60; ++l) {
        Vec x = smooth(gen.symmetric_vector(npix));
        radon_experts.inputs.push_back(x);
        radon_experts.outputs.push_back(wrm.mat.apply(x));
    }
    auto est = bi_orthonormalize_svd(radon_experts);
    double target = std::sqrt(2.0 * pi);
    if (std::fabs(est[0].value - target) > 0.15 * target)
        c.fail("radon top estimate " + std::to_string(est[0].value));

    // gs_learn_solve reproduces training pairs
    Matrix b(5, 3);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j) b(i, j) = gen.next_symmetric() + (i == j ? 2.0 : 0.0);
    ExpertSet gse;
    for (int l = 0; l < 3; ++l) {
        Vec x = gen.symmetric_vector(3);
        gse.inputs.push_back(x);
        gse.outputs.push_back(b.apply(x));
    }
    for (std::size_t l = 0; l < gse.size(); ++l) {
        double gap = norm2(sub(gs_learn_solve(gse, gse.outputs[l]), gse.inputs[l]));
        if (gap > 1e-10) c.fail("gs_learn_solve training gap " + std::to_string(gap));
    }
}

void criterion8_kernels(Criterion& c) {
    // single-point closed forms
    RkhsModel m1 = rkhs_regress({{0.0}}, Vec{2.0}, KernelSpec{}, 1.0);
    if (std::fabs(m1.coefficients[0] - 1.0) > 1e-14) c.fail("rkhs single-point coefficient");
    if (std::fabs(rkhs_predict(m1, {0.0}) - 1.0) > 1e-14) c.fail("rkhs single-point prediction");
    ExpertSet single;
    single.inputs = {{0.0, 0.0}};
    single.outputs = {{2.0, -4.0}};
    VRKHSModel v1 = vrkhs_fit(single, KernelSpec{}, 1.0);
    Vec pred = v1.apply({0.0, 0.0});
    if (std::fabs(pred[0] - 1.0) > 1e-14 || std::fabs(pred[1] + 2.0) > 1e-14)
        c.fail("vrkhs single-pair prediction");

    // interpolation limit
    SplitMix64 gen(801);
    std::vector<Vec> pts;
    Vec vals;
    for (int l = 0; l < 5; ++l) {
        pts.push_back(gen.symmetric_vector(2));
        vals.push_back(gen.next_symmetric());
    }
    RkhsModel mi = rkhs_regress(pts, vals, KernelSpec{}, 1e-10);
    for (std::size_t l = 0; l < pts.size(); ++l)
        if (std::fabs(rkhs_predict(mi, pts[l]) - vals[l]) > 1e-5) c.fail("rkhs interpolation limit");
    ExpertSet ie;
    for (int l = 0; l < 4; ++l) {
        ie.inputs.push_back(gen.symmetric_vector(2));
        ie.outputs.push_back(gen.symmetric_vector(3));
    }
    VRKHSModel vi = vrkhs_fit(ie, KernelSpec{}, 1e-10);
    for (std::size_t l = 0; l < ie.size(); ++l)
        if (norm2(sub(vi.apply(ie.inputs[l]), ie.outputs[l])) > 1e-5)
            c.fail("vrkhs interpolation limit");

    // perturbation optimality of the vrkhs objective
    ExpertSet pe;
    for (int l = 0; l < 5; ++l) {
        pe.inputs.push_back(gen.symmetric_vector(2));
        pe.outputs.push_back(gen.symmetric_vector(2));
    }
    const double alpha = 0.3;
    VRKHSModel vp = vrkhs_fit(pe, KernelSpec{}, alpha);
    const std::size_t n0 = pe.size();
    Matrix gram(n0, n0);
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = 0; j < n0; ++j)
            gram(i, j) = kernel_eval(vp.kernel(), norm2(sub(pe.inputs[i], pe.inputs[j])));
    auto objective = [&](const std::vector<Vec>& h) {
        double fit = 0.0;
        for (std::size_t l = 0; l < n0; ++l) {
            Vec p(pe.outputs[l].size(), 0.0);
            for (std::size_t j = 0; j < n0; ++j) p = axpy(gram(l, j), h[j], p);
            fit += std::pow(norm2(sub(p, pe.outputs[l])), 2);
        }
        double pen = 0.0;
        for (std::size_t i = 0; i < n0; ++i)
            for (std::size_t j = 0; j < n0; ++j) pen += gram(i, j) * dot(h[i], h[j]);
        return fit / n0 + alpha * pen;
    };
    auto h_star = vp.representer_coefficients();
    double best = objective(h_star);
    for (int probe = 0; probe < 20; ++probe) {
        auto h = h_star;
        Vec dir = gen.symmetric_vector(n0 * 2);
        double nrm = norm2(dir);
        for (std::size_t i = 0; i < n0; ++i)
            for (int d = 0; d < 2; ++d) h[i][d] += 1e-3 * dir[i * 2 + d] / nrm;
        if (objective(h) < best - 1e-14) c.fail("vrkhs objective decreased under perturbation");
    }
}

void criterion9_greedy(Criterion& c) {
    auto act = rqnn_default_activation();
    const int grid = 256;
    auto dict = rqnn_dictionary(2, grid, act);
    auto find_atom = [&](int k, int kv) -> const DictionaryAtom* {
        for (const auto& d : dict)
            if (d.atom.k == k && d.atom.kvec[0] == kv) return &d;
        return nullptr;
    };
    // exact single-atom recovery
    {
        const DictionaryAtom* one = find_atom(1, 1);
        if (!one) { c.fail("atom (1,1) missing"); return; }
        GridFunction1D f(grid, one->samples);
        GreedyResult res = greedy_approximate(f, dict, 1);
        if (res.residual_norms.back() > 1e-10)
            c.fail("single-atom residual " + std::to_string(res.residual_norms.back()));
    }
    // J-term targets: the coefficient-sum bound at every N <= 4 J
    SplitMix64 gen(901);
    std::vector<std::vector<std::pair<std::pair<int, int>, double>>> targets = {
        {{{0, 0}, 1.0}},
        {{{0, 0}, 1.0}, {{1, 1}, 0.5}},
        {{{0, 0}, 1.0}, {{1, 1}, 0.5}, {{-1, 0}, 0.25}},
    };
    for (const auto& terms : targets) {
        Vec fv(grid + 1, 0.0);
        double coeff_l1 = 0.0;
        for (const auto& [kkv, coeff] : terms) {
            const DictionaryAtom* d = find_atom(kkv.first, kkv.second);
            if (!d) { c.fail("target atom missing"); return; }
            fv = axpy(coeff, d->samples, fv);
            coeff_l1 += std::fabs(coeff);
        }
        GridFunction1D f(grid, fv);
        int budget = static_cast<int>(terms.size()) * 4;
        GreedyResult res = greedy_approximate(f, dict, budget);
        for (std::size_t step = 0; step < res.residual_norms.size(); ++step) {
            double n = static_cast<double>(step + 1);
            if (res.residual_norms[step] > coeff_l1 / std::sqrt(n + 1.0) + 1e-12) {
                std::ostringstream os;
                os << "J=" << terms.size() << " N=" << step + 1 << " residual "
                   << res.residual_norms[step] << " > " << coeff_l1 / std::sqrt(n + 1.0);
                c.fail(os.str());
            }
        }
    }
}

void criterion10_alnn(Criterion& c) {
    SplitMix64 gen(1001);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        ALNNParams p(2, 3);
        for (auto& v : p.values) v = gen.next_symmetric();
        Vec s{gen.next_symmetric(), gen.next_symmetric()};
        Vec grad = alnn_jacobian(p, Activation::tanh_act(), s);
        for (std::size_t q = 0; q < p.size(); ++q) {
            const double eps = 1e-6;
            ALNNParams pp = p, pm = p;
            pp.values[q] += eps;
            pm.values[q] -= eps;
            double fd = (alnn_eval(pp, Activation::tanh_act(), s) -
                         alnn_eval(pm, Activation::tanh_act(), s)) / (2 * eps);
            worst = std::max(worst, std::fabs(fd - grad[q]) / (1.0 + std::fabs(grad[q])));
        }
    }
    if (worst > 1e-5) c.fail("jacobian finite-difference gap " + std::to_string(worst));

    ALNNParams truth(1, 2);
    truth.alpha(0) = 1.2; truth.weight(0, 0) = 3.0; truth.theta(0) = -1.0;
    truth.alpha(1) = -0.7; truth.weight(1, 0) = -2.0; truth.theta(1) = 0.4;
    auto target = GridFunction1D::sample(
        128, [&](double s) { return alnn_eval(truth, Activation::tanh_act(), {s}); });
    ALNNParams start = truth;
    for (auto& v : start.values) v += 1e-2 * gen.next_symmetric();
    auto [fit, log] = gauss_newton_fit(target, start, Activation::tanh_act());
    if (log.records.back().residual > 1e-8)
        c.fail("fit residual " + std::to_string(log.records.back().residual));
    std::vector<double> tail;
    for (const auto& rec : log.records)
        if (rec.residual > 1e-14) tail.push_back(rec.residual);
    if (tail.size() >= 3) {
        double q1 = tail[tail.size() - 1] / tail[tail.size() - 2];
        double q2 = tail[tail.size() - 2] / tail[tail.size() - 3];
        if (!(q1 < q2)) c.fail("residual decay is not superlinear");
    } else {
        c.fail("too few residual records for the decay check");
    }
}

void criterion11_parameter_rules(Criterion& c) {
    auto step_distance = [](const AlphaGrid& coarse, double chosen, double oracle) {
        double step = std::log(coarse.values[0] / coarse.values[1]);
        return std::fabs(std::log(chosen) - std::log(oracle)) / step;
    };
    for (int seed = 0; seed < 20; ++seed) {
        SplitMix64 gen(1100 + seed);

        // morozov on random diagonal draws
        {
            std::size_t dim = 2 + gen.next_u64() % 4;
            Vec sigma(dim);
            for (auto& s : sigma) s = 0.1 + gen.next_double();
            DiagonalOperator op(sigma);
            Vec xt(dim);
            for (auto& v : xt) v = gen.next_symmetric();
            double delta = 0.02 + 0.05 * gen.next_double();
            Vec ydelta = add_noise(op.apply(xt), NoiseSpec(delta, 9100 + seed));
            Vec x0(dim, 0.0);
            AlphaGrid coarse = AlphaGrid::geometric(10.0, std::pow(10.0, -0.25), 20);
            auto solver = [&](double alpha, const Vec&) {
                return diagonal_tikhonov_exact(op, ydelta, x0, alpha);
            };
            auto rc = morozov_select(op, ydelta, delta, 1.5, coarse, solver, x0);
            AlphaGrid fine = AlphaGrid::geometric(10.0, std::pow(10.0, -0.025), 191);
            double oracle = fine.values.back();
            for (double alpha : fine.values) {
                Vec x = diagonal_tikhonov_exact(op, ydelta, x0, alpha);
                if (norm2(sub(op.apply(x), ydelta)) <= 1.5 * delta) { oracle = alpha; break; }
            }
            if (step_distance(coarse, rc.chosen_alpha, oracle) > 1.0 + 1e-9)
                c.fail("morozov seed " + std::to_string(seed));
        }

        // gcv on the two-singular-value family
        {
            Matrix f(2, 2);
            f(0, 0) = 1.0;
            f(1, 1) = 0.1;
            Vec y = f.apply(Vec{1.0, 1.0});
            y = add_noise(y, NoiseSpec(0.05, 9200 + seed));
            AlphaGrid coarse = AlphaGrid::geometric(1.0, std::pow(10.0, -0.25), 16);
            AlphaGrid fine = AlphaGrid::geometric(1.0, std::pow(10.0, -0.025), 151);
            auto rc = gcv_select(f, y, coarse);
            auto rf = gcv_select(f, y, fine);
            if (step_distance(coarse, rc.chosen_alpha, rf.chosen_alpha) > 1.0 + 1e-9)
                c.fail("gcv seed " + std::to_string(seed));
        }

        // lcurve on the spread-spectrum family
        {
            const std::size_t dim = 12;
            Vec sigma(dim);
            for (std::size_t j = 0; j < dim; ++j)
                sigma[j] = std::pow(10.0, -3.0 * static_cast<double>(j) / (dim - 1));
            DiagonalOperator op(sigma);
            Vec xt(dim);
            for (auto& v : xt) v = 1.0 + 0.2 * gen.next_symmetric();
            Vec ydelta = add_noise(op.apply(xt), NoiseSpec(1e-2, 9300 + seed));
            Vec x0(dim, 0.0);
            auto solver = [&](double alpha, const Vec&) {
                return diagonal_tikhonov_exact(op, ydelta, x0, alpha);
            };
            AlphaGrid coarse = AlphaGrid::geometric(1.0, std::pow(10.0, -0.5), 15);
            AlphaGrid fine = AlphaGrid::geometric(1.0, std::pow(10.0, -0.05), 141);
            auto rc = lcurve_select(op, ydelta, coarse, solver, x0);
            auto rf = lcurve_select(op, ydelta, fine, solver, x0);
            if (step_distance(coarse, rc.chosen_alpha, rf.chosen_alpha) > 1.0 + 1e-9)
                c.fail("lcurve seed " + std::to_string(seed));
        }

        // empirical risk with noisy expert data
        {
            DiagonalOperator op(Vec{1.0, 0.3, 0.05});
            ExpertSet experts;
            for (int l = 0; l < 5; ++l) {
                Vec x = gen.symmetric_vector(3);
                experts.inputs.push_back(x);
                experts.outputs.push_back(add_noise(op.apply(x), NoiseSpec(0.05, 9400 + 10 * seed + l)));
            }
            Vec x0(3, 0.0);
            auto solver = [&](double alpha, const Vec& data, const Vec&) {
                return diagonal_tikhonov_exact(op, data, x0, alpha);
            };
            AlphaGrid coarse = AlphaGrid::geometric(1.0, std::pow(10.0, -0.25), 16);
            AlphaGrid fine = AlphaGrid::geometric(1.0, std::pow(10.0, -0.025), 151);
            auto rc = empirical_risk_select(op, experts, coarse, solver, x0);
            auto rf = empirical_risk_select(op, experts, fine, solver, x0);
            if (step_distance(coarse, rc.chosen_alpha, rf.chosen_alpha) > 1.0 + 1e-9)
                c.fail("erm seed " + std::to_string(seed));
        }
    }
}

void criterion12_determinism(Criterion& c) {
    // fixture files
    {
        auto f = GridFunction1D::sample(128, [](double s) { return std::sin(2 * pi * s) * s; });
        std::ofstream out("acc_target.csv");
        write_csv(out, f);
    }
    {
        ExpertSet experts;
        SplitMix64 gen(1201);
        Matrix a(3, 3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) a(i, j) = gen.next_symmetric() + (i == j ? 1.5 : 0.0);
        for (int l = 0; l < 3; ++l) {
            Vec x = gen.symmetric_vector(3);
            experts.inputs.push_back(x);
            experts.outputs.push_back(a.apply(x));
        }
        std::ofstream out("acc_experts.csv");
        save_expert_set_csv(out, experts);
    }
    {
        std::ofstream out("acc_grid.txt");
        double a = 1.0;
        for (int i = 0; i < 12; ++i, a *= 0.5) out << std::setprecision(17) << a << "\n";
    }
    {
        std::ofstream out("acc_rate.cfg");
        out << "n = 64\nseed = 11\n";
    }
    std::vector<std::pair<std::string, std::string>> runs = {
        {"radon-svd --kmax 2 --m 16 --nt 24 --ntheta 24", "acc_d1"},
        {"tikhonov --problem diag --alpha 0.1 --delta 0.01 --seed 3", "acc_d2"},
        {"iterate --method landweber --problem diag --delta 1e-2 --tau 2.5 --seed 5", "acc_d3"},
        {"learn --method bisvd --experts acc_experts.csv", "acc_d4"},
        {"select --rule morozov --grid acc_grid.txt --delta 0.05 --tau 1.5 --seed 7", "acc_d5"},
        {"nnfit --target acc_target.csv --neurons 2 --seed 9", "acc_d6"},
        {"greedy --scales 1 --atoms 4 --target acc_target.csv", "acc_d7"},
    };
    for (const auto& [args, stem] : runs) {
        std::string f1 = stem + "_a.csv", f2 = stem + "_b.csv";
        if (run_cli(args + " --out " + f1) != 0 || run_cli(args + " --out " + f2) != 0) {
            c.fail("CLI failed: " + args);
            continue;
        }
        if (slurp(f1).empty() || slurp(f1) != slurp(f2)) c.fail("bytes differ: " + args);
    }
    // config-driven experiments
    if (run_cli("rate-fem --out .") != 0) c.fail("rate-fem failed");
    std::string fem1 = slurp("rate_fem.csv");
    if (run_cli("rate-fem --out .") != 0) c.fail("rate-fem rerun failed");
    if (fem1.empty() || fem1 != slurp("rate_fem.csv")) c.fail("rate-fem bytes differ");
    if (run_cli("rate-tikhonov --config acc_rate.cfg --out .") != 0) c.fail("rate-tikhonov failed");
    std::string rt1 = slurp("rate_tikhonov.csv");
    if (run_cli("rate-tikhonov --config acc_rate.cfg --out .") != 0) c.fail("rate-tikhonov rerun failed");
    if (rt1.empty() || rt1 != slurp("rate_tikhonov.csv")) c.fail("rate-tikhonov bytes differ");
    if (run_cli("hybrid --out .") != 0) c.fail("hybrid failed");
    std::string hy1 = slurp("hybrid.csv");
    if (run_cli("hybrid --out .") != 0) c.fail("hybrid rerun failed");
    if (hy1.empty() || hy1 != slurp("hybrid.csv")) c.fail("hybrid bytes differ");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <path-to-invreg-cli>\n";
        return 2;
    }
    g_cli_path = argv[1];

    Criterion{1, "Radon singular values via radon-svd", 60.0, {}}.run(criterion1_radon_svd);
    Criterion{2, "adjoint identities (c-example, a-example, Radon)", 10.0, {}}.run(criterion2_adjoints);
    Criterion{3, "FEM convergence rate 2.0 +- 0.3", 5.0, {}}.run(criterion3_fem_rate);
    Criterion{4, "Tikhonov rate 0.5 +- 0.15 under the source condition", 120.0, {}}.run(criterion4_tikhonov_rate);
    Criterion{5, "diagonal-oracle equivalence to 1e-8", 5.0, {}}.run(criterion5_oracles);
    Criterion{6, "Landweber monotonicity and finite stopping", 60.0, {}}.run(criterion6_landweber);
    Criterion{7, "operator learning (bi-SVD, Radon, Gram-Schmidt solve)", 30.0, {}}.run(criterion7_operator_learning);
    Criterion{8, "kernel regression closed forms and optimality", 5.0, {}}.run(criterion8_kernels);
    Criterion{9, "greedy (N+1)^{-1/2} approximation bound", 30.0, {}}.run(criterion9_greedy);
    Criterion{10, "ALNN jacobian and Gauss-Newton recovery", 20.0, {}}.run(criterion10_alnn);
    Criterion{11, "parameter rules match brute-force oracles", 30.0, {}}.run(criterion11_parameter_rules);
    Criterion{12, "byte-identical CLI reruns", 120.0, {}}.run(criterion12_determinism);

    if (g_failures == 0) {
        std::printf("acceptance: all 12 criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
}
