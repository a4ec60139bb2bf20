// invreg: batch CLI for the regularization experiment suite.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "invreg/csv.hpp"
#include "invreg/harness.hpp"
#include "invreg/nnfun.hpp"
#include "invreg/oplearn.hpp"
#include "invreg/paramsel.hpp"
#include "invreg/radon.hpp"

using namespace invreg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgument = 2;
constexpr int kExitNumerical = 3;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open output file " + path);
    return out;
}

// canonical key=value text for flag-driven subcommands so the emitted CSV
// carries a reproducible config hash
FlatConfig flags_config(const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ostringstream os;
    for (const auto& [k, v] : kv) os << k << " = " << v << "\n";
    return FlatConfig::parse(os.str());
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void run_radon_svd(int kmax, int m, int nt, int ntheta, const std::string& out_path) {
    auto cfg = flags_config({{"kmax", std::to_string(kmax)},
                             {"m", std::to_string(m)},
                             {"nt", std::to_string(nt)},
                             {"ntheta", std::to_string(ntheta)}});
    auto triples = analytic_singular_system(kmax, m, nt, ntheta);
    auto out = open_out(out_path);
    out << hash_comment(cfg.hash());
    out << "k,l,gamma_analytic,gamma_numeric,residual\n" << std::setprecision(17);
    for (const auto& trip : triples) {
        SinogramGrid ru = radon_apply(trip.u, nt, ntheta);
        double unorm = trip.u.norm();
        double gamma_numeric = weighted_radon_norm(ru) / unorm;
        SinogramGrid gap = ru;
        for (std::size_t i = 0; i < gap.values.size(); ++i)
            gap.values[i] -= trip.gamma * trip.v.values[i];
        double residual = weighted_radon_norm(gap) / trip.gamma;
        out << trip.k << ',' << trip.l << ',' << trip.gamma << ',' << gamma_numeric << ','
            << residual << "\n";
    }
}

void run_tikhonov_cli(const std::string& problem_name, double alpha, double delta,
                      std::uint64_t seed, int n, const std::string& out_path) {
    auto cfg = flags_config({{"problem", problem_name},
                             {"alpha", fmt(alpha)},
                             {"delta", fmt(delta)},
                             {"seed", std::to_string(seed)},
                             {"n", std::to_string(n)}});
    std::unique_ptr<ForwardProblem> owned;
    Vec x_true;
    if (problem_name == "cexample") {
        owned = std::make_unique<CExampleProblem>(harness_detail::make_cexample(n));
        x_true = harness_detail::cexample_truth(n);
    } else if (problem_name == "aexample") {
        owned = std::make_unique<AExampleProblem>(harness_detail::make_aexample(n));
        x_true = harness_detail::aexample_coefficient(n);
    } else if (problem_name == "diag") {
        owned = std::make_unique<DiagonalOperator>(Vec{1.0, 0.5, 0.1});
        x_true = {1.0, -0.5, 0.8};
    } else {
        throw std::invalid_argument("unknown problem " + problem_name);
    }
    const ForwardProblem& problem = *owned;
    Vec y = problem.apply(x_true);
    Vec ydelta = y;
    if (delta > 0.0) {
        Vec dir = detail::noise_direction(y.size(), NoiseSpec(delta, seed),
                                          [&](const Vec& v) { return problem.data_norm(v); });
        ydelta = add(y, dir);
    }
    TikhonovConfig tik;
    tik.alpha = alpha;
    tik.x0_prior = problem.project_domain(Vec(problem.param_dim(), 1.0));
    tik.seed = seed;
    auto [x, rep] = tikhonov_minimize(problem, ydelta, tik);
    auto out = open_out(out_path);
    out << hash_comment(cfg.hash());
    out << "alpha,delta,objective,grad_norm,error_to_truth\n" << std::setprecision(17);
    out << alpha << ',' << delta << ',' << rep.objective << ',' << rep.grad_norm << ','
        << problem.param_norm(sub(x, x_true)) << "\n";
}

void run_iterate_cli(const std::string& method, const std::string& problem_name, double delta_factor,
                     double tau, std::uint64_t seed, int n, const std::string& out_path) {
    std::ostringstream cfg_text;
    cfg_text << "problem = " << problem_name << "\n"
             << "delta_factor = " << fmt(delta_factor) << "\n"
             << "tau = " << fmt(tau) << "\n"
             << "seed = " << seed << "\n"
             << "n = " << n << "\n"
             << "method = " << method << "\n";
    FlatConfig cfg = FlatConfig::parse(cfg_text.str());
    std::ostringstream body;
    IterativeComparison cmp = run_iterative_compare(cfg, &body);
    bool found = false;
    for (const auto& row : cmp.rows) found = found || row.method == method;
    if (!found) throw std::invalid_argument("unknown method " + method);
    auto out = open_out(out_path);
    out << hash_comment(cfg.hash());
    out << "k,residual,error,mu_or_alpha\n";
    std::istringstream lines(body.str());
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind(method + ",", 0) == 0) out << line.substr(method.size() + 1) << "\n";
    }
}

void run_learn_cli(const std::string& method, const std::string& experts_path,
                   const std::string& out_path) {
    std::ifstream in(experts_path);
    if (!in) throw std::invalid_argument("cannot open experts file " + experts_path);
    ExpertSet experts = load_expert_set_csv(in);
    auto out = open_out(out_path);
    auto cfg = flags_config({{"method", method}, {"experts", experts_path}});
    out << hash_comment(cfg.hash());
    out << std::setprecision(17);
    if (method == "gs") {
        OrthoBasis basis = gram_schmidt(experts.outputs);
        out << "l,i,value\n";
        for (std::size_t l = 0; l < basis.vectors.size(); ++l)
            for (std::size_t i = 0; i < basis.vectors[l].size(); ++i)
                out << l << ',' << i << ',' << basis.vectors[l][i] << "\n";
    } else if (method == "lsq") {
        Matrix f = least_squares_operator(experts);
        out << "i,j,value\n";
        for (std::size_t i = 0; i < f.rows(); ++i)
            for (std::size_t j = 0; j < f.cols(); ++j) out << i << ',' << j << ',' << f(i, j) << "\n";
    } else if (method == "bisvd") {
        auto est = bi_orthonormalize_svd(experts);
        out << "index,sigma\n";
        for (std::size_t i = 0; i < est.size(); ++i) out << i << ',' << est[i].value << "\n";
    } else if (method == "vrkhs") {
        VRKHSModel model = vrkhs_fit(experts, KernelSpec{}, 1e-6);
        out << "l,fit_error\n";
        for (std::size_t l = 0; l < experts.size(); ++l) {
            Vec pred = model.apply(experts.inputs[l]);
            out << l << ',' << norm2(sub(pred, experts.outputs[l])) << "\n";
        }
    } else {
        throw std::invalid_argument("unknown learn method " + method);
    }
}

void write_selection(const SelectionReport& report, const FlatConfig& cfg,
                     const std::string& out_path) {
    auto out = open_out(out_path);
    out << hash_comment(cfg.hash());
    save_selection_report_csv(out, report);
}

void run_select_cli(const std::string& rule, const std::string& grid_path, double delta,
                    double tau, std::uint64_t seed, const std::string& out_path) {
    // alpha grid: one value per line, descending
    std::ifstream gf(grid_path);
    if (!gf) throw std::invalid_argument("cannot open grid file " + grid_path);
    Vec alphas;
    std::string line;
    while (std::getline(gf, line)) {
        if (line.empty() || line[0] == '#') continue;
        alphas.push_back(std::stod(line));
    }
    AlphaGrid grid(alphas);
    auto cfg = flags_config({{"rule", rule},
                             {"grid", grid_path},
                             {"delta", fmt(delta)},
                             {"tau", fmt(tau)},
                             {"seed", std::to_string(seed)}});

    // built-in diagonal demo family with singular values spanning 1e-3..1
    const std::size_t dim = 12;
    Vec sigma(dim);
    for (std::size_t j = 0; j < dim; ++j)
        sigma[j] = std::pow(10.0, -3.0 * static_cast<double>(j) / (dim - 1));
    DiagonalOperator op(sigma);
    SplitMix64 gen(seed);
    Vec x_true(dim);
    for (auto& v : x_true) v = 1.0 + 0.2 * gen.next_symmetric();
    Vec y = op.apply(x_true);
    Vec ydelta = add_noise(y, NoiseSpec(delta, seed + 1));
    Vec x0(dim, 0.0);
    auto solver = [&](double alpha, const Vec&) {
        return diagonal_tikhonov_exact(op, ydelta, x0, alpha);
    };

    SelectionReport report;
    if (rule == "apriori") {
        double alpha = apriori_alpha(delta, tau);
        auto out = open_out(out_path);
        out << hash_comment(cfg.hash());
        out << "alpha,residual,xnorm,score\n" << std::setprecision(17);
        Vec x = diagonal_tikhonov_exact(op, ydelta, x0, alpha);
        out << alpha << ',' << norm2(sub(op.apply(x), ydelta)) << ',' << norm2(sub(x, x0)) << ','
            << alpha << "\n";
        out << "# chosen_alpha=" << alpha << "\n";
        return;
    } else if (rule == "morozov") {
        report = morozov_select(op, ydelta, delta, tau, grid, solver, x0);
    } else if (rule == "gcv") {
        Matrix f(dim, dim);
        for (std::size_t j = 0; j < dim; ++j) f(j, j) = sigma[j];
        report = gcv_select(f, ydelta, grid);
    } else if (rule == "lcurve") {
        report = lcurve_select(op, ydelta, grid, solver, x0);
    } else if (rule == "erm") {
        ExpertSet experts;
        for (int l = 0; l < 5; ++l) {
            Vec x(dim);
            for (auto& v : x) v = gen.next_symmetric();
            experts.inputs.push_back(x);
            experts.outputs.push_back(add_noise(op.apply(x), NoiseSpec(delta, seed + 10 + l)));
        }
        auto esolver = [&](double alpha, const Vec& data, const Vec&) {
            return diagonal_tikhonov_exact(op, data, x0, alpha);
        };
        report = empirical_risk_select(op, experts, grid, esolver, x0);
    } else {
        throw std::invalid_argument("unknown selection rule " + rule);
    }
    write_selection(report, cfg, out_path);
}

void run_nnfit_cli(const std::string& target_path, int neurons, std::uint64_t seed,
                   const std::string& out_path) {
    std::ifstream in(target_path);
    if (!in) throw std::invalid_argument("cannot open target file " + target_path);
    GridFunction1D target = load_grid_function_csv(in);
    auto cfg = flags_config({{"target", target_path},
                             {"neurons", std::to_string(neurons)},
                             {"seed", std::to_string(seed)}});
    // Gauss-Newton converges locally; restart from several seeded inits and
    // keep the best fit
    SplitMix64 gen(seed);
    ALNNParams best_fit(1, neurons);
    IterationLog best_log;
    double best_residual = std::numeric_limits<double>::infinity();
    for (int start = 0; start < 8; ++start) {
        ALNNParams init(1, neurons);
        for (auto& v : init.values) v = 2.0 * gen.next_symmetric();
        try {
            auto [fit, log] = gauss_newton_fit(target, init, Activation::tanh_act());
            if (log.records.back().residual < best_residual) {
                best_residual = log.records.back().residual;
                best_fit = fit;
                best_log = std::move(log);
            }
        } catch (const std::runtime_error&) {
            continue;  // degenerate start
        }
    }
    if (!std::isfinite(best_residual))
        throw std::runtime_error("nnfit: every start hit a degenerate parametrization");
    auto out = open_out(out_path);
    out << hash_comment(cfg.hash());
    save_alnn_csv(out, best_fit);
    out << "# final_residual=" << std::setprecision(17) << best_residual
        << " iterations=" << best_log.stopping_index() << "\n";
}

void run_greedy_cli(const std::string& target_path, int scales, int atoms,
                    const std::string& out_path) {
    std::ifstream in(target_path);
    if (!in) throw std::invalid_argument("cannot open target file " + target_path);
    GridFunction1D target = load_grid_function_csv(in);
    auto cfg = flags_config({{"target", target_path},
                             {"scales", std::to_string(scales)},
                             {"atoms", std::to_string(atoms)}});
    auto act = rqnn_default_activation();
    auto dict = rqnn_dictionary(scales, target.n, act);
    GreedyResult res = greedy_approximate(target, dict, atoms);
    auto out = open_out(out_path);
    out << hash_comment(cfg.hash());
    out << "step,residual,k,shift\n" << std::setprecision(17);
    for (std::size_t i = 0; i < res.residual_norms.size(); ++i)
        out << i + 1 << ',' << res.residual_norms[i] << ',' << res.selected[i].k << ','
            << res.selected[i].kvec[0] << "\n";
}

FlatConfig load_config(const std::string& path) {
    return path.empty() ? FlatConfig::parse("") : FlatConfig::from_file(path);
}

}  // namespace

// applies config-file values to options the user did not set on the command
// line; explicit flags win over the config, the config wins over defaults
template <class T>
void config_default(const CLI::Option* opt, const FlatConfig& cfg, const std::string& key, T& value) {
    if (opt->count() > 0 || !cfg.has(key)) return;
    if constexpr (std::is_same_v<T, std::string>)
        value = cfg.get_string(key, value);
    else if constexpr (std::is_floating_point_v<T>)
        value = cfg.get_number(key, value);
    else
        value = static_cast<T>(cfg.get_number(key, static_cast<double>(value)));
}

int main(int argc, char** argv) {
    CLI::App app{"invreg: regularization methods for nonlinear inverse problems"};
    app.require_subcommand(1);

    std::string config_path;

    // radon-svd
    int kmax = 7, img_m = 32, nt = 64, ntheta = 64;
    std::string out_path = "out.csv";
    auto* svd_cmd = app.add_subcommand("radon-svd", "singular system of the discrete Radon transform");
    auto* o_kmax = svd_cmd->add_option("--kmax", kmax);
    auto* o_m = svd_cmd->add_option("--m", img_m);
    auto* o_nt = svd_cmd->add_option("--nt", nt);
    auto* o_ntheta = svd_cmd->add_option("--ntheta", ntheta);
    svd_cmd->add_option("--out", out_path);
    svd_cmd->add_option("--config", config_path);

    // tikhonov
    std::string problem_name = "cexample";
    double alpha = 1e-2, delta = 1e-2, tau = 2.5, delta_factor = 3e-4;
    std::uint64_t seed = 1;
    int grid_n = 64;
    auto* tik_cmd = app.add_subcommand("tikhonov", "single Tikhonov solve");
    auto* o_tprob = tik_cmd->add_option("--problem", problem_name);
    auto* o_alpha = tik_cmd->add_option("--alpha", alpha);
    auto* o_tdelta = tik_cmd->add_option("--delta", delta);
    auto* o_tseed = tik_cmd->add_option("--seed", seed);
    auto* o_tn = tik_cmd->add_option("--n", grid_n);
    tik_cmd->add_option("--out", out_path);
    tik_cmd->add_option("--config", config_path);

    // iterate
    std::string method = "landweber";
    auto* it_cmd = app.add_subcommand("iterate", "iterative regularization run");
    auto* o_imethod = it_cmd->add_option("--method", method);
    auto* o_iprob = it_cmd->add_option("--problem", problem_name);
    auto* o_idelta = it_cmd->add_option("--delta", delta_factor)
                         ->description("noise level relative to ||y||");
    auto* o_itau = it_cmd->add_option("--tau", tau);
    auto* o_iseed = it_cmd->add_option("--seed", seed);
    auto* o_in = it_cmd->add_option("--n", grid_n);
    it_cmd->add_option("--out", out_path);
    it_cmd->add_option("--config", config_path);

    // learn
    std::string experts_path;
    auto* learn_cmd = app.add_subcommand("learn", "operator learning from expert pairs");
    auto* o_lmethod = learn_cmd->add_option("--method", method)->description("gs|lsq|bisvd|vrkhs");
    auto* o_lexperts = learn_cmd->add_option("--experts", experts_path);
    learn_cmd->add_option("--out", out_path);
    learn_cmd->add_option("--config", config_path);

    // select
    std::string rule = "morozov", grid_path;
    auto* sel_cmd = app.add_subcommand("select", "regularization parameter selection");
    auto* o_rule = sel_cmd->add_option("--rule", rule);
    auto* o_grid = sel_cmd->add_option("--grid", grid_path);
    auto* o_sdelta = sel_cmd->add_option("--delta", delta);
    auto* o_stau = sel_cmd->add_option("--tau", tau);
    auto* o_sseed = sel_cmd->add_option("--seed", seed);
    sel_cmd->add_option("--out", out_path);
    sel_cmd->add_option("--config", config_path);

    // nnfit
    std::string target_path;
    int neurons = 3;
    auto* nn_cmd = app.add_subcommand("nnfit", "Gauss-Newton fit of a shallow network");
    auto* o_target = nn_cmd->add_option("--target", target_path);
    auto* o_neurons = nn_cmd->add_option("--neurons", neurons);
    auto* o_nseed = nn_cmd->add_option("--seed", seed);
    nn_cmd->add_option("--out", out_path);
    nn_cmd->add_option("--config", config_path);

    // greedy
    int scales = 2, atoms = 8;
    auto* greedy_cmd = app.add_subcommand("greedy", "orthogonal greedy wavelet approximation");
    auto* o_scales = greedy_cmd->add_option("--scales", scales);
    auto* o_atoms = greedy_cmd->add_option("--atoms", atoms);
    auto* o_gtarget = greedy_cmd->add_option("--target", target_path);
    greedy_cmd->add_option("--out", out_path);
    greedy_cmd->add_option("--config", config_path);

    // config-driven experiments
    std::string out_dir = ".";
    auto* rt_cmd = app.add_subcommand("rate-tikhonov", "Tikhonov convergence-rate experiment");
    rt_cmd->add_option("--config", config_path);
    rt_cmd->add_option("--out", out_dir);
    auto* rf_cmd = app.add_subcommand("rate-fem", "FEM self-convergence experiment");
    rf_cmd->add_option("--config", config_path);
    rf_cmd->add_option("--out", out_dir);
    auto* hy_cmd = app.add_subcommand("hybrid", "plain vs hybrid Tikhonov comparison");
    hy_cmd->add_option("--config", config_path);
    hy_cmd->add_option("--out", out_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitArgument;
    }

    try {
        FlatConfig file_cfg = load_config(config_path);
        if (svd_cmd->parsed()) {
            config_default(o_kmax, file_cfg, "kmax", kmax);
            config_default(o_m, file_cfg, "m", img_m);
            config_default(o_nt, file_cfg, "nt", nt);
            config_default(o_ntheta, file_cfg, "ntheta", ntheta);
            run_radon_svd(kmax, img_m, nt, ntheta, out_path);
        } else if (tik_cmd->parsed()) {
            config_default(o_tprob, file_cfg, "problem", problem_name);
            config_default(o_alpha, file_cfg, "alpha", alpha);
            config_default(o_tdelta, file_cfg, "delta", delta);
            config_default(o_tseed, file_cfg, "seed", seed);
            config_default(o_tn, file_cfg, "n", grid_n);
            run_tikhonov_cli(problem_name, alpha, delta, seed, grid_n, out_path);
        } else if (it_cmd->parsed()) {
            config_default(o_imethod, file_cfg, "method", method);
            config_default(o_iprob, file_cfg, "problem", problem_name);
            config_default(o_idelta, file_cfg, "delta_factor", delta_factor);
            config_default(o_itau, file_cfg, "tau", tau);
            config_default(o_iseed, file_cfg, "seed", seed);
            config_default(o_in, file_cfg, "n", grid_n);
            run_iterate_cli(method, problem_name, delta_factor, tau, seed, grid_n, out_path);
        } else if (learn_cmd->parsed()) {
            config_default(o_lmethod, file_cfg, "method", method);
            config_default(o_lexperts, file_cfg, "experts", experts_path);
            if (experts_path.empty()) throw std::invalid_argument("learn: --experts is required");
            run_learn_cli(method, experts_path, out_path);
        } else if (sel_cmd->parsed()) {
            config_default(o_rule, file_cfg, "rule", rule);
            config_default(o_grid, file_cfg, "grid", grid_path);
            config_default(o_sdelta, file_cfg, "delta", delta);
            config_default(o_stau, file_cfg, "tau", tau);
            config_default(o_sseed, file_cfg, "seed", seed);
            if (grid_path.empty()) throw std::invalid_argument("select: --grid is required");
            run_select_cli(rule, grid_path, delta, tau, seed, out_path);
        } else if (nn_cmd->parsed()) {
            config_default(o_target, file_cfg, "target", target_path);
            config_default(o_neurons, file_cfg, "neurons", neurons);
            config_default(o_nseed, file_cfg, "seed", seed);
            if (target_path.empty()) throw std::invalid_argument("nnfit: --target is required");
            run_nnfit_cli(target_path, neurons, seed, out_path);
        } else if (greedy_cmd->parsed()) {
            config_default(o_scales, file_cfg, "scales", scales);
            config_default(o_atoms, file_cfg, "atoms", atoms);
            config_default(o_gtarget, file_cfg, "target", target_path);
            if (target_path.empty()) throw std::invalid_argument("greedy: --target is required");
            run_greedy_cli(target_path, scales, atoms, out_path);
        } else if (rt_cmd->parsed()) {
            auto out = open_out(out_dir + "/rate_tikhonov.csv");
            RateResult r = run_rate_tikhonov(file_cfg, &out);
            std::cout << "rate-tikhonov: exponent " << r.exponent << "\n";
        } else if (rf_cmd->parsed()) {
            auto out = open_out(out_dir + "/rate_fem.csv");
            RateResult r = run_rate_fem(file_cfg, &out);
            std::cout << "rate-fem: exponent " << r.exponent << "\n";
        } else if (hy_cmd->parsed()) {
            auto out = open_out(out_dir + "/hybrid.csv");
            HybridComparison h = run_hybrid_comparison(file_cfg, &out);
            std::cout << "hybrid: plain " << h.plain_exponent << " hybrid " << h.hybrid_exponent
                      << " envelope_ok " << h.envelope_ok << "\n";
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return kExitArgument;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
