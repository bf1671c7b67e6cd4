#include "ellipsde/solver.hpp"

#include "ellipsde/errors.hpp"
#include "ellipsde/young.hpp"

#include <cmath>
#include <string>

namespace ellipsde {

void SolverConfig::validate(double gamma) const {
    if (!(kappa > 0.0 && kappa < 1.0)) throw InvalidInput("solver: kappa must lie in (0,1)");
    if (!(gamma + kappa > 1.0)) throw InvalidInput("solver: need gamma + kappa > 1 for Young integration");
    if (!(tol > 0.0)) throw InvalidInput("solver: tol must be positive");
    if (max_iters < 1) throw InvalidInput("solver: max_iters must be at least 1");
    if (!(K_ball > 1.0)) throw InvalidInput("solver: K_ball must exceed 1");
}

namespace {

// Updates smaller than this multiple of the iterate's norm are rounding noise; ratios between
// them carry no information about contraction.
constexpr double kNoiseFloor = 1e-11;

template <typename Step>
GridFunction fixed_point(Step&& step, GridFunction u, const SolverConfig& cfg, IterationStats& stats,
                         const char* what) {
    double prev = 0.0;
    bool prev_informative = false;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        GridFunction next = step(u);
        const double diff = holder_norm(next - u, cfg.kappa).norm;
        const double floor = kNoiseFloor * holder_norm(next, cfg.kappa).norm;
        const bool informative = diff > floor;
        stats.iterations = k;
        stats.increments.push_back(diff);
        if (prev_informative && informative) {
            const double ratio = diff / prev;
            stats.ratios.push_back(ratio);
            if (ratio > stats.contraction_ratio) stats.contraction_ratio = ratio;
            if (ratio >= 1.0)
                throw DivergenceError(std::string(what) + ": update ratio " + std::to_string(ratio) +
                                          " at iteration " + std::to_string(k),
                                      stats.ratios);
        }
        u = std::move(next);
        if (diff < cfg.tol || !informative) return u;
        prev = diff;
        prev_informative = informative;
    }
    throw DivergenceError(std::string(what) + ": no convergence in " + std::to_string(cfg.max_iters) +
                              " iterations",
                          stats.ratios);
}

std::vector<double> increments(const GridFunction& x) {
    std::vector<double> dx(x.n());
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = x[i + 1] - x[i];
    return dx;
}

}  // namespace

std::vector<double> green_apply(std::span<const double> a) {
    const std::size_t n = a.size();
    const double h = 1.0 / static_cast<double>(n);
    std::vector<double> suffix(n + 1, 0.0);
    for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] + a[k];
    double moment = 0.0;
    for (std::size_t i = 0; i < n; ++i) moment += static_cast<double>(i) * h * a[i];

    std::vector<double> out(n + 1, 0.0);
    double cum = 0.0;
    for (std::size_t m = 1; m < n; ++m) {
        cum += suffix[m];
        out[m] = h * cum - static_cast<double>(m) * h * moment;
    }
    // Both ends vanish identically since K(0, .) = K(1, .) = 0.
    return out;
}

GridFunction gamma_map(const GridFunction& z, const GridFunction& x, const Coefficient& sigma, double G) {
    require_same_grid(z, x, "gamma_map");
    const std::size_t n = x.n();
    if (G == 0.0) return GridFunction::constant(n, 0.0);
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = G * sigma(z[i]) * (x[i + 1] - x[i]);
    return GridFunction(green_apply(a));
}

GridFunction gamma_map(const GridFunction& z, const GridFunction& x, const Coefficient& sigma,
                       const CutoffSpec& spec) {
    spec.validate();
    return gamma_map(z, x, sigma, cutoff_value(x, spec));
}

double compact_residual(const GridFunction& z, const GridFunction& x, const Coefficient& sigma, double G) {
    require_same_grid(z, x, "compact_residual");
    const GridFunction s = sigma.apply(z);
    double worst = 0.0;
    for (std::size_t m = 0; m <= x.n(); ++m)
        worst = std::max(worst, std::abs(z[m] - G * kernel_integral_at(m, s, x)));
    return worst;
}

Solution solve_elliptic(const GridFunction& x, const Coefficient& sigma, const CutoffSpec& spec,
                        const SolverConfig& cfg) {
    spec.validate();
    cfg.validate(spec.gamma);
    const CutoffState cut = evaluate_cutoff(x, spec);

    Solution sol;
    sol.cutoff_value = cut.value;
    sol.cutoff_argument = cut.argument;
    sol.smallness = coefficient_smallness(sigma, spec.M);
    sol.z = fixed_point([&](const GridFunction& z) { return gamma_map(z, x, sigma, cut.value); },
                        GridFunction::constant(x.n(), 0.0), cfg, sol.stats, "solve_elliptic");
    sol.residual = compact_residual(sol.z, x, sigma, cut.value);
    sol.z_kappa_norm = holder_norm(sol.z, cfg.kappa).norm;
    sol.in_ball = sol.z_kappa_norm <= cfg.K_ball;
    return sol;
}

LinearOperator::LinearOperator(const GridFunction& R, const GridFunction& x, double G) : R_(R) {
    require_same_grid(R, x, "LinearOperator");
    weights_ = increments(x);
    for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] *= G * R[i];
}

std::vector<double> LinearOperator::apply(const GridFunction& y) const {
    if (y.n() != weights_.size()) throw InvalidInput("LinearOperator: grid mismatch");
    std::vector<double> a(weights_.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = weights_[i] * y[i];
    return green_apply(a);
}

double LinearOperator::r_kappa_norm(double kappa) const { return holder_norm(R_, kappa).norm; }

LinearSolution LinearOperator::solve(const GridFunction& w, const SolverConfig& cfg) const {
    if (w.n() != weights_.size()) throw InvalidInput("solve_linear: grid mismatch");
    LinearSolution out;
    out.y = fixed_point(
        [&](const GridFunction& y) {
            std::vector<double> v = apply(y);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] - v[i];
            return GridFunction(std::move(v));
        },
        w, cfg, out.stats, "solve_linear");
    const double wn = holder_norm(w, cfg.kappa).norm;
    out.norm_ratio = wn > 0.0 ? holder_norm(out.y, cfg.kappa).norm / wn : 0.0;
    out.r_kappa_norm = r_kappa_norm(cfg.kappa);
    return out;
}

LinearSolution solve_linear(const GridFunction& w, const GridFunction& R, const GridFunction& x,
                            const CutoffSpec& spec, const SolverConfig& cfg) {
    spec.validate();
    cfg.validate(spec.gamma);
    require_same_grid(w, x, "solve_linear");
    LinearOperator op(R, x, cutoff_value(x, spec));
    LinearSolution out = op.solve(w, cfg);
    out.implied_constant = (spec.M + 1.0) * out.r_kappa_norm;
    return out;
}

}  // namespace ellipsde
