#include "ellipsde/coefficient.hpp"
#include "ellipsde/config.hpp"
#include "ellipsde/errors.hpp"
#include "ellipsde/experiments.hpp"
#include "ellipsde/malliavin.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace ellipsde;
using nlohmann::json;

namespace {

constexpr int kExitInvalid = 2;
constexpr int kExitDivergence = 3;

// Flags shared by every subcommand, kept as raw strings so that an explicit flag can
// override the same key from --config.
struct CommonFlags {
    std::string config;
    Settings flags;

    void add(CLI::App* cmd, const std::vector<std::pair<std::string, std::string>>& keys) {
        cmd->add_option("--config", config, "key = value settings file; flags override it");
        for (const auto& [key, help] : keys) {
            std::string flag = "--" + key;
            for (char& c : flag)
                if (c == '_') c = '-';
            cmd->add_option_function<std::string>(flag, [this, key = key](const std::string& v) { flags[key] = v; },
                                                  help);
        }
    }

    ExperimentConfig resolve() const {
        Settings s = config.empty() ? Settings{} : read_settings_file(config);
        return experiment_config(merge_settings(std::move(s), flags));
    }
};

const std::vector<std::pair<std::string, std::string>> kSolveKeys = {
    {"n", "grid subintervals"},
    {"gamma", "path Hölder exponent of the cutoff norm"},
    {"kappa", "solution Hölder exponent"},
    {"p", "integrability exponent of the cutoff norm"},
    {"epsilon", "regularity margin"},
    {"M", "cutoff level"},
    {"cutoff", "sobolev | garsia"},
    {"sigma", "const:c | tanh:a0,a1 | sin:a0,a1"},
    {"path", "file.csv | fbm:H:seed | linear:A | sin:A:K | weierstrass:alpha[:A]"},
    {"tol", "fixed-point tolerance on the kappa norm"},
    {"max_iters", "iteration cap"},
    {"K_ball", "invariant ball radius (reported only)"},
    {"output_dir", "directory for CSV and JSON output"},
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + p.string());
    out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

fs::path prepare_dir(const std::string& dir) {
    fs::create_directories(dir);
    return fs::path(dir);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double("list", item));
    if (out.empty()) throw InvalidInput("empty list '" + s + "'");
    return out;
}

json solve_summary(const ExperimentConfig& cfg, const Solution& sol, const GridFunction& x) {
    json j = {{"config", to_json(cfg)}, {"diagnostics", to_json(sol)}};
    j["norms"] = {{"x_gamma", holder_norm(x, cfg.spec.gamma).norm},
                  {"x_cutoff_argument", sol.cutoff_argument},
                  {"z_kappa", sol.z_kappa_norm}};
    return j;
}

int run_solve(const CommonFlags& f) {
    const ExperimentConfig cfg = f.resolve();
    cfg.spec.validate();
    cfg.solver.validate(cfg.spec.gamma);
    const Coefficient sigma = Coefficient::parse(cfg.sigma);
    const GridFunction x = make_path(cfg.path, cfg.fbm.n);
    const Solution sol = solve_elliptic(x, sigma, cfg.spec, cfg.solver);
    const fs::path dir = prepare_dir(cfg.output_dir);
    write_csv_file((dir / "solution.csv").string(), sol.z);
    write_json(dir / "solve.json", solve_summary(cfg, sol, x));
    std::printf("solve: %d iterations, contraction ratio %.3g, residual %.3g, cutoff %.6g\n", sol.iterations(),
                sol.contraction_ratio(), sol.residual, sol.cutoff_value);
    return 0;
}

int run_malliavin(const CommonFlags& f, const std::string& t_list, const std::string& direction, double fd_eps) {
    const ExperimentConfig cfg = f.resolve();
    cfg.spec.validate();
    cfg.solver.validate(cfg.spec.gamma);
    const Coefficient sigma = Coefficient::parse(cfg.sigma);
    const GridFunction x = make_path(cfg.path, cfg.fbm.n);
    const Solution sol = solve_elliptic(x, sigma, cfg.spec, cfg.solver);
    const DerivativeKernel k = malliavin_kernel(sol, x, sigma, cfg.spec, cfg.solver);

    json per_t = json::array();
    for (double t : parse_list(t_list)) {
        const StratoDecomposition sd = strato_decomposition(sol, k, x, sigma, t, cfg.fbm.H);
        const SignPattern sp = sign_pattern(k, t);
        per_t.push_back({{"t", t},
                         {"z_t", sol.z[x.node_index(t)]},
                         {"h_norm", derivative_h_norm(k, t, cfg.fbm.H)},
                         {"strato",
                          {{"pathwise", sd.pathwise},
                           {"trace", sd.trace},
                           {"skorohod", sd.skorohod},
                           {"trace_abs_integral", sd.trace_abs_integral}}},
                         {"sign_pattern",
                          {{"negative_increment_fraction", sp.negative_fraction},
                           {"longest_negative_run", {sp.run_start, sp.run_end}}}}});
    }
    const GridFunction h = make_path(direction, cfg.fbm.n);
    const GridFunction dd = directional_derivative(k, h);
    const GridFunction fd = finite_difference_derivative(x, h, sigma, cfg.spec, cfg.solver, fd_eps);
    const double scale = fd.sup_norm();
    const double fd_abs = (dd - fd).sup_norm();

    const fs::path dir = prepare_dir(cfg.output_dir);
    {
        std::ofstream out(dir / "kernel.csv", std::ios::binary);
        out << "s";
        for (std::size_t j = 0; j <= k.n; ++j) out << ",t=" << j;
        out << "\n";
        char buf[64];
        for (std::size_t i = 0; i <= k.n; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", x.t(i));
            out << buf;
            for (std::size_t j = 0; j <= k.n; ++j) {
                std::snprintf(buf, sizeof buf, ",%.17g", k.values(i, j));
                out << buf;
            }
            out << "\n";
        }
    }
    json j = solve_summary(cfg, sol, x);
    j["H"] = cfg.fbm.H;
    j["kernel"] = {{"cutoff_value", k.cutoff_value},
                   {"max_contraction_ratio", k.max_contraction_ratio},
                   {"max_fixed_point_residual", k.max_fixed_point_residual}};
    j["evaluations"] = per_t;
    j["fd_check"] = {{"direction", direction},
                     {"eps", fd_eps},
                     {"abs_error", fd_abs},
                     {"rel_error", scale > 0.0 ? json(fd_abs / scale) : json(nullptr)}};
    write_json(dir / "malliavin.json", j);
    std::printf("malliavin: kernel %zu x %zu, fd abs error %.3g\n", k.n + 1, k.n + 1, fd_abs);
    return 0;
}

int run_density(const CommonFlags& f) {
    const ExperimentConfig cfg = f.resolve();
    const DensityReport r = density_experiment(cfg);
    const fs::path dir = prepare_dir(cfg.output_dir);
    json j = {{"config", to_json(cfg)}, {"report", to_json(r)}};
    write_json(dir / "density.json", j);
    {
        std::ofstream out(dir / "histogram.csv", std::ios::binary);
        out << "bin_lo,bin_hi,count\n";
        const std::size_t bins = r.histogram.counts.size();
        const double w = bins ? (r.histogram.hi - r.histogram.lo) / static_cast<double>(bins) : 0.0;
        char buf[96];
        for (std::size_t b = 0; b < bins; ++b) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu\n", r.histogram.lo + w * b, r.histogram.lo + w * (b + 1),
                          r.histogram.counts[b]);
            out << buf;
        }
    }
    std::printf("density: N=%zu omega_a=%zu below=%zu diverged=%zu positive_norm_fraction=%.6g min_norm=%.3g\n",
                r.N_total, r.N_omega_a, r.N_below_threshold, r.N_diverged, r.positive_norm_fraction,
                r.min_h_norm_on_omega_a);
    return 0;
}

int run_convergence(const CommonFlags& f, const std::string& kind, const std::string& sizes,
                    const std::string& integrand, double t) {
    const ExperimentConfig cfg = f.resolve();
    StudyInputs in;
    in.path = cfg.path;
    in.integrand = integrand.empty() ? cfg.path : integrand;
    in.sigma = cfg.sigma;
    in.spec = cfg.spec;
    in.solver = cfg.solver;
    in.t_eval = t;
    in.H = cfg.fbm.H;
    std::vector<std::size_t> ns;
    for (double v : parse_list(sizes)) {
        if (v < 2 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw InvalidInput("grid sizes must be integers >= 2");
        ns.push_back(static_cast<std::size_t>(v));
    }
    const ConvergenceTable table = convergence_study(parse_study_kind(kind), ns, in);
    const fs::path dir = prepare_dir(cfg.output_dir);
    {
        std::ofstream out(dir / "convergence.csv", std::ios::binary);
        out << "n,value,difference\n";
        char buf[96];
        for (const StudyRow& r : table.rows) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.n, r.value, r.difference);
            out << buf;
        }
    }
    json j = {{"config", to_json(cfg)}, {"integrand", in.integrand}, {"t", t}, {"table", to_json(table)}};
    write_json(dir / "convergence.json", j);
    if (table.fit)
        std::printf("convergence (%s): slope %.4f, r2 %.4f\n", kind.c_str(), table.fit->slope, table.fit->r2);
    else
        std::printf("convergence (%s): differences vanish, no slope\n", kind.c_str());
    return 0;
}

int run_fbm_sample(const CommonFlags& f) {
    const ExperimentConfig cfg = f.resolve();
    const GridFunction b = sample_fbm(cfg.fbm);
    const fs::path dir = prepare_dir(cfg.output_dir);
    write_csv_file((dir / "path.csv").string(), b);
    write_json(dir / "path.json", {{"H", cfg.fbm.H}, {"n", cfg.fbm.n}, {"seed", cfg.fbm.seed}});
    std::printf("fbm-sample: wrote %zu nodes\n", b.n() + 1);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Elliptic SDEs on [0,1] driven by Hölder paths"};
    app.require_subcommand(1);

    CommonFlags solve_f, mall_f, dens_f, conv_f, fbm_f;
    auto* solve = app.add_subcommand("solve", "solve the localized elliptic equation for one path");
    solve_f.add(solve, kSolveKeys);

    auto* mall = app.add_subcommand("malliavin", "derivative kernel, |H| norms and trace decomposition");
    auto mall_keys = kSolveKeys;
    mall_keys.push_back({"H", "Hurst parameter for the |H| inner product"});
    mall_f.add(mall, mall_keys);
    std::string t_list = "0.5", direction = "sin:1:1";
    double fd_eps = 1e-4;
    mall->add_option("--t", t_list, "comma-separated evaluation nodes");
    mall->add_option("--fd-direction", direction, "path descriptor of the finite-difference direction h");
    mall->add_option("--fd-eps", fd_eps, "finite-difference step");

    auto* dens = app.add_subcommand("density", "Monte Carlo density experiment over fBm samples");
    auto dens_keys = kSolveKeys;
    dens_keys.erase(std::remove_if(dens_keys.begin(), dens_keys.end(), [](auto& k) { return k.first == "path"; }),
                    dens_keys.end());
    for (auto k : std::vector<std::pair<std::string, std::string>>{{"H", "Hurst parameter"},
                                                                  {"seed", "base seed"},
                                                                  {"N", "Monte Carlo samples"},
                                                                  {"t_eval", "evaluation node"},
                                                                  {"a", "exclusion radius of Omega_a"},
                                                                  {"threads", "worker threads (0: all cores)"}})
        dens_keys.push_back(k);
    dens_f.add(dens, dens_keys);

    auto* conv = app.add_subcommand("convergence", "refinement study with log-log slope");
    auto conv_keys = kSolveKeys;
    conv_keys.push_back({"H", "Hurst parameter for the malliavin kind"});
    conv_f.add(conv, conv_keys);
    std::string kind = "young", sizes = "64,128,256,512,1024,2048", integrand;
    double conv_t = 0.5;
    conv->add_option("--kind", kind, "young | solver | malliavin");
    conv->add_option("--sizes", sizes, "comma-separated grid sizes");
    conv->add_option("--integrand", integrand, "integrand path g for the young kind (default: the path)");
    conv->add_option("--t", conv_t, "evaluation node for solver and malliavin kinds");

    auto* fbm = app.add_subcommand("fbm-sample", "exact fBm path on the grid");
    fbm_f.add(fbm, {{"H", "Hurst parameter"}, {"n", "grid subintervals"}, {"seed", "seed"},
                    {"output_dir", "output directory"}});

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalid;
    }

    try {
        if (*solve) return run_solve(solve_f);
        if (*mall) return run_malliavin(mall_f, t_list, direction, fd_eps);
        if (*dens) return run_density(dens_f);
        if (*conv) return run_convergence(conv_f, kind, sizes, integrand, conv_t);
        if (*fbm) return run_fbm_sample(fbm_f);
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "divergence: %s\n", e.what());
        return kExitDivergence;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
