#include "ellipsde/experiments.hpp"

#include "ellipsde/coefficient.hpp"
#include "ellipsde/errors.hpp"
#include "ellipsde/malliavin.hpp"
#include "ellipsde/young.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace ellipsde {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double to_double(const std::string& s, const std::string& ctx) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty() || !std::isfinite(v))
        throw InvalidInput("bad number '" + s + "' in path descriptor '" + ctx + "'");
    return v;
}

GridFunction restrict_to(const GridFunction& fine, std::size_t n) {
    const std::size_t step = fine.n() / n;
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) v[i] = fine[i * step];
    return GridFunction(std::move(v));
}

}  // namespace

GridFunction make_path(const std::string& descriptor, std::size_t n) {
    const auto parts = split(descriptor, ':');
    const std::string kind = parts.empty() ? "" : parts[0];
    auto arg = [&](std::size_t i) { return to_double(parts.at(i), descriptor); };
    if (kind == "linear" && parts.size() == 2) {
        const double A = arg(1);
        return GridFunction::sample(n, [A](double t) { return A * t; });
    }
    if (kind == "sin" && parts.size() == 3) {
        const double A = arg(1), K = arg(2);
        return GridFunction::sample(n, [=](double t) { return A * std::sin(K * std::numbers::pi * t); });
    }
    if (kind == "weierstrass" && (parts.size() == 2 || parts.size() == 3)) {
        const double alpha = arg(1);
        const double A = parts.size() == 3 ? arg(2) : 1.0;
        if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("weierstrass: alpha must lie in (0,1)");
        return GridFunction::sample(n, [=](double t) {
            double s = 0.0;
            for (int k = 0; k <= 30; ++k)
                s += std::pow(2.0, -k * alpha) *
                     std::sin(std::ldexp(1.0, k) * std::numbers::sqrt2 * std::numbers::pi * t + k);
            return A * s;
        });
    }
    if (kind == "fbm" && parts.size() == 3) {
        FbmConfig c;
        c.H = arg(1);
        c.n = n;
        const double seed = arg(2);
        if (seed < 0 || seed != std::floor(seed)) throw InvalidInput("fbm: seed must be a nonnegative integer");
        c.seed = static_cast<std::uint64_t>(seed);
        return sample_fbm(c);
    }
    std::string file;
    if (kind == "file" && parts.size() >= 2)
        file = descriptor.substr(5);
    else if (descriptor.size() > 4 && descriptor.substr(descriptor.size() - 4) == ".csv")
        file = descriptor;
    if (!file.empty()) {
        GridFunction f = read_csv_file(file);
        if (f.n() != n)
            throw InvalidInput("path file " + file + " has n = " + std::to_string(f.n()) + ", expected " +
                               std::to_string(n));
        return f;
    }
    throw InvalidInput("unknown path descriptor '" + descriptor + "'");
}

std::vector<GridFunction> make_path_family(const std::string& descriptor, const std::vector<std::size_t>& sizes) {
    if (sizes.empty()) return {};
    if (descriptor.rfind("fbm:", 0) != 0) {
        std::vector<GridFunction> out;
        for (std::size_t n : sizes) out.push_back(make_path(descriptor, n));
        return out;
    }
    const std::size_t finest = *std::max_element(sizes.begin(), sizes.end());
    for (std::size_t n : sizes)
        if (n == 0 || finest % n != 0) throw InvalidInput("fbm path family: grid sizes must divide the finest");
    const GridFunction fine = make_path(descriptor, finest);
    std::vector<GridFunction> out;
    for (std::size_t n : sizes) out.push_back(restrict_to(fine, n));
    return out;
}

LinearFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw InvalidInput("fit_line: need at least two points");
    const double m = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw InvalidInput("fit_line: abscissae are all equal");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

void ExperimentConfig::validate() const {
    fbm.validate();
    spec.validate();
    solver.validate(spec.gamma);
    if (N == 0) throw InvalidInput("experiment: N must be at least 1");
    if (!(a > 0.0)) throw InvalidInput("experiment: a must be positive");
    if (!(t_eval > 0.0 && t_eval < 1.0)) throw InvalidInput("experiment: t_eval must lie in (0,1)");
    GridFunction::constant(fbm.n, 0.0).node_index(t_eval);
}

std::uint64_t sample_seed(std::uint64_t base, std::size_t index) {
    // splitmix64 finalizer over (base, index)
    std::uint64_t z = base * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(index) + 0x632BE59BD9B4E019ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace {

SampleRecord run_sample(const ExperimentConfig& cfg, const Coefficient& sigma, std::size_t index) {
    SampleRecord rec;
    rec.seed = sample_seed(cfg.fbm.seed, index);
    FbmConfig fc = cfg.fbm;
    fc.seed = rec.seed;
    const GridFunction x = sample_fbm(fc);
    try {
        const Solution sol = solve_elliptic(x, sigma, cfg.spec, cfg.solver);
        const std::size_t ti = x.node_index(cfg.t_eval);
        rec.z_t = sol.z[ti];
        rec.cutoff_value = sol.cutoff_value;
        rec.cutoff_argument = sol.cutoff_argument;
        rec.iterations = sol.iterations();
        rec.contraction_ratio = sol.contraction_ratio();
        if (std::abs(rec.z_t) < cfg.a) {
            rec.status = SampleStatus::BelowThreshold;
            return rec;
        }
        const DerivativeKernel k = malliavin_kernel(sol, x, sigma, cfg.spec, cfg.solver);
        rec.h_norm = derivative_h_norm(k, cfg.t_eval, cfg.fbm.H);
        const SignPattern sp = sign_pattern(k, cfg.t_eval);
        rec.negative_increment_fraction = sp.negative_fraction;
        rec.negative_run_start = sp.run_start;
        rec.negative_run_end = sp.run_end;
        rec.status = SampleStatus::OmegaA;
    } catch (const DivergenceError& e) {
        rec.status = SampleStatus::Diverged;
        rec.message = e.what();
    }
    return rec;
}

}  // namespace

DensityReport density_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const Coefficient sigma = Coefficient::parse(cfg.sigma);
    if (!sigma.sigma0())
        throw InvalidInput("density experiment needs a nondegenerate sigma (|sigma| >= sigma0 > 0)");
    if (cfg.spec.flavor != CutoffFlavor::Garsia)
        throw InvalidInput("density experiment needs the garsia cutoff flavor");

    FbmCholesky::cached(cfg.fbm.H, cfg.fbm.n);  // build the shared factor before spawning workers
    std::vector<SampleRecord> recs(cfg.N);
    std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, cfg.N);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.N; i = next++) {
            try {
                recs[i] = run_sample(cfg, sigma, i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    DensityReport r;
    r.N_total = cfg.N;
    r.min_h_norm_on_omega_a = std::numeric_limits<double>::infinity();
    r.min_cutoff_on_omega_a = std::numeric_limits<double>::infinity();
    std::size_t positive = 0;
    std::vector<double> zs;
    for (const SampleRecord& s : recs) {
        r.seeds.push_back(s.seed);
        switch (s.status) {
            case SampleStatus::Diverged: ++r.N_diverged; break;
            case SampleStatus::BelowThreshold: ++r.N_below_threshold; break;
            case SampleStatus::OmegaA:
                ++r.N_omega_a;
                zs.push_back(s.z_t);
                if (s.h_norm > 1e-8) ++positive;
                r.min_h_norm_on_omega_a = std::min(r.min_h_norm_on_omega_a, s.h_norm);
                r.min_cutoff_on_omega_a = std::min(r.min_cutoff_on_omega_a, s.cutoff_value);
                r.max_argument_on_omega_a = std::max(r.max_argument_on_omega_a, s.cutoff_argument);
                break;
        }
    }
    r.samples = std::move(recs);
    if (r.N_omega_a == 0) {
        r.min_h_norm_on_omega_a = 0.0;
        r.min_cutoff_on_omega_a = 0.0;
        return r;
    }
    r.positive_norm_fraction = static_cast<double>(positive) / static_cast<double>(r.N_omega_a);
    r.fitted_C = r.min_cutoff_on_omega_a > 0.0 ? cfg.a / r.min_cutoff_on_omega_a
                                               : std::numeric_limits<double>::infinity();

    constexpr std::size_t kBins = 40;
    const auto [lo, hi] = std::minmax_element(zs.begin(), zs.end());
    r.histogram.lo = *lo;
    r.histogram.hi = *hi;
    r.histogram.counts.assign(kBins, 0);
    const double width = (*hi - *lo) / kBins;
    for (double z : zs) {
        std::size_t b = width > 0.0 ? static_cast<std::size_t>((z - *lo) / width) : 0;
        ++r.histogram.counts[std::min(b, kBins - 1)];
    }
    return r;
}

StudyKind parse_study_kind(const std::string& s) {
    if (s == "young") return StudyKind::Young;
    if (s == "solver") return StudyKind::Solver;
    if (s == "malliavin") return StudyKind::Malliavin;
    throw InvalidInput("unknown study kind '" + s + "' (expected young|solver|malliavin)");
}

std::string to_string(StudyKind k) {
    switch (k) {
        case StudyKind::Young: return "young";
        case StudyKind::Solver: return "solver";
        case StudyKind::Malliavin: return "malliavin";
    }
    return "young";
}

ConvergenceTable convergence_study(StudyKind kind, const std::vector<std::size_t>& sizes,
                                   const StudyInputs& in) {
    if (sizes.size() < 3) throw InvalidInput("convergence_study: need at least three grid sizes");
    if (!std::is_sorted(sizes.begin(), sizes.end()) ||
        std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end())
        throw InvalidInput("convergence_study: grid sizes must be strictly increasing");

    ConvergenceTable table;
    table.kind = kind;
    const std::vector<GridFunction> xs = make_path_family(in.path, sizes);
    std::vector<GridFunction> solutions;
    table.exact_reference = kind == StudyKind::Young && in.integrand == in.path;
    const std::vector<GridFunction> gs = kind == StudyKind::Young && !table.exact_reference
                                             ? make_path_family(in.integrand, sizes)
                                             : std::vector<GridFunction>{};

    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const std::size_t n = sizes[k];
        StudyRow row;
        row.n = n;
        if (kind == StudyKind::Young) {
            const GridFunction& f = xs[k];
            if (table.exact_reference) {
                row.value = young_sum(f, f, 0, n);
                row.difference = std::abs(row.value - 0.5 * (f[n] * f[n] - f[0] * f[0]));
            } else {
                row.value = young_sum(gs[k], f, 0, n);
            }
        } else {
            const Coefficient sigma = Coefficient::parse(in.sigma);
            Solution sol = solve_elliptic(xs[k], sigma, in.spec, in.solver);
            const std::size_t ti = xs[k].node_index(in.t_eval);
            if (kind == StudyKind::Solver) {
                row.value = sol.z[ti];
                solutions.push_back(sol.z);
            } else {
                const DerivativeKernel dk = malliavin_kernel(sol, xs[k], sigma, in.spec, in.solver);
                row.value = derivative_h_norm(dk, in.t_eval, in.H);
            }
        }
        table.rows.push_back(row);
    }

    for (std::size_t k = 0; k + 1 < table.rows.size() && !table.exact_reference; ++k) {
        if (kind == StudyKind::Solver) {
            const GridFunction& c = solutions[k];
            const GridFunction& f = solutions[k + 1];
            if (f.n() % c.n() != 0)
                throw InvalidInput("convergence_study: solver kind needs each size to divide the next");
            const std::size_t step = f.n() / c.n();
            double d = 0.0;
            for (std::size_t i = 0; i <= c.n(); ++i) d = std::max(d, std::abs(c[i] - f[i * step]));
            table.rows[k].difference = d;
        } else {
            table.rows[k].difference = std::abs(table.rows[k].value - table.rows[k + 1].value);
        }
    }

    std::vector<double> lx, ly;
    const std::size_t fitted = table.exact_reference ? table.rows.size() : table.rows.size() - 1;
    for (std::size_t k = 0; k < fitted; ++k) {
        if (table.rows[k].difference > 0.0) {
            lx.push_back(std::log(static_cast<double>(table.rows[k].n)));
            ly.push_back(std::log(table.rows[k].difference));
        }
    }
    if (lx.size() >= 2) table.fit = fit_line(lx, ly);
    return table;
}

namespace {

const char* status_name(SampleStatus s) {
    switch (s) {
        case SampleStatus::OmegaA: return "omega_a";
        case SampleStatus::BelowThreshold: return "below_threshold";
        case SampleStatus::Diverged: return "diverged";
    }
    return "diverged";
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& c) {
    return {
        {"H", c.fbm.H},
        {"n", c.fbm.n},
        {"seed", c.fbm.seed},
        {"M", c.spec.M},
        {"gamma", c.spec.gamma},
        {"p", c.spec.p},
        {"epsilon", c.spec.epsilon},
        {"cutoff", to_string(c.spec.flavor)},
        {"sigma", c.sigma},
        {"kappa", c.solver.kappa},
        {"tol", c.solver.tol},
        {"max_iters", c.solver.max_iters},
        {"K_ball", c.solver.K_ball},
        {"N", c.N},
        {"t_eval", c.t_eval},
        {"a", c.a},
        {"output_dir", c.output_dir},
        {"path", c.path},
    };
}

nlohmann::json to_json(const DensityReport& r) {
    nlohmann::json samples = nlohmann::json::array();
    for (const SampleRecord& s : r.samples) {
        nlohmann::json j = {{"seed", s.seed},
                            {"status", status_name(s.status)}};
        if (s.status != SampleStatus::Diverged) {
            j["z_t"] = s.z_t;
            j["cutoff_value"] = s.cutoff_value;
            j["cutoff_argument"] = s.cutoff_argument;
            j["iterations"] = s.iterations;
            j["contraction_ratio"] = s.contraction_ratio;
        } else {
            j["message"] = s.message;
        }
        if (s.status == SampleStatus::OmegaA) {
            j["h_norm"] = s.h_norm;
            j["sign_pattern"] = {{"negative_increment_fraction", s.negative_increment_fraction},
                                 {"longest_negative_run", {s.negative_run_start, s.negative_run_end}}};
        }
        samples.push_back(std::move(j));
    }
    return {
        {"N_total", r.N_total},
        {"N_omega_a", r.N_omega_a},
        {"N_below_threshold", r.N_below_threshold},
        {"N_diverged", r.N_diverged},
        {"positive_norm_fraction", r.positive_norm_fraction},
        {"min_h_norm_on_omega_a", r.min_h_norm_on_omega_a},
        {"min_cutoff_on_omega_a", r.min_cutoff_on_omega_a},
        {"max_argument_on_omega_a", r.max_argument_on_omega_a},
        {"fitted_C", std::isfinite(r.fitted_C) ? nlohmann::json(r.fitted_C) : nlohmann::json(nullptr)},
        {"histogram", {{"lo", r.histogram.lo}, {"hi", r.histogram.hi}, {"counts", r.histogram.counts}}},
        {"seeds", r.seeds},
        {"samples", samples},
    };
}

nlohmann::json to_json(const ConvergenceTable& t) {
    nlohmann::json rows = nlohmann::json::array();
    for (const StudyRow& r : t.rows) rows.push_back({{"n", r.n}, {"value", r.value}, {"difference", r.difference}});
    nlohmann::json j = {{"kind", to_string(t.kind)},
                        {"difference", t.exact_reference ? "exact_limit" : "successive"},
                        {"rows", rows}};
    if (t.fit)
        j["fit"] = {{"slope", t.fit->slope}, {"intercept", t.fit->intercept}, {"r2", t.fit->r2}};
    else
        j["fit"] = nullptr;
    return j;
}

nlohmann::json to_json(const Solution& s) {
    return {
        {"iterations", s.stats.iterations},
        {"contraction_ratio", s.stats.contraction_ratio},
        {"increments", s.stats.increments},
        {"residual", s.residual},
        {"cutoff_value", s.cutoff_value},
        {"cutoff_argument", s.cutoff_argument},
        {"z_kappa_norm", s.z_kappa_norm},
        {"z_sup_norm", s.z.sup_norm()},
        {"in_ball", s.in_ball},
        {"smallness", {{"implied_c1", s.smallness.implied_constant}, {"below_one", s.smallness.below_one}}},
    };
}

}  // namespace ellipsde
