#include "ellipsde/malliavin.hpp"

#include "ellipsde/errors.hpp"
#include "ellipsde/fbm.hpp"
#include "ellipsde/young.hpp"

#include <cmath>
#include <string>

namespace ellipsde {

double PsiData::operator()(std::size_t s, std::size_t t) const {
    const std::size_t n = sigma_z.n();
    const double ts = GridFunction::node_time(s, n);
    const double tt = GridFunction::node_time(t, n);
    return G * sigma_z[s] * (std::min(tt, ts) - tt * ts) + m[s] * I[t];
}

PsiData psi_data(const Solution& z, const GridFunction& x, const Coefficient& sigma, const CutoffSpec& spec) {
    require_same_grid(z.z, x, "psi_data");
    PsiData d;
    d.G = z.cutoff_value;
    d.sigma_z = sigma.apply(z.z);
    d.m = cutoff_derivative_weights(x, spec);
    d.I.resize(x.n() + 1);
    for (std::size_t t = 0; t <= x.n(); ++t) d.I[t] = kernel_integral_at(t, d.sigma_z, x);
    return d;
}

double psi_kernel(double s, double t, const Solution& z, const GridFunction& x, const Coefficient& sigma,
                  const CutoffSpec& spec) {
    const std::size_t si = x.node_index(s);
    const std::size_t ti = x.node_index(t);
    return psi_data(z, x, sigma, spec)(si, ti);
}

DerivativeKernel malliavin_kernel(const Solution& z, const GridFunction& x, const Coefficient& sigma,
                                  const CutoffSpec& spec, const SolverConfig& cfg) {
    spec.validate();
    cfg.validate(spec.gamma);
    const std::size_t n = x.n();
    const PsiData psi = psi_data(z, x, sigma, spec);
    // The linear solver works with y = w - G int K R y dx, so R carries the minus sign.
    const LinearOperator op(sigma.apply_d1(z.z) * -1.0, x, psi.G);

    DerivativeKernel k;
    k.n = n;
    k.values = GridSquare(n);
    k.flavor = spec.flavor;
    k.cutoff_value = psi.G;
    k.iterations.resize(n + 1);
    std::vector<double> w(n + 1);
    for (std::size_t s = 0; s <= n; ++s) {
        for (std::size_t t = 0; t <= n; ++t) w[t] = psi(s, t);
        const GridFunction ws(w);
        LinearSolution ls;
        try {
            ls = op.solve(ws, cfg);
        } catch (const DivergenceError& e) {
            throw DivergenceError("malliavin_kernel: solve at s = " + std::to_string(x.t(s)) + " failed: " +
                                      e.what(),
                                  e.ratios());
        }
        k.values.set_row(s, ls.y);
        k.iterations[s] = ls.stats.iterations;
        k.max_contraction_ratio = std::max(k.max_contraction_ratio, ls.stats.contraction_ratio);
        const std::vector<double> lin = op.apply(ls.y);
        for (std::size_t t = 0; t <= n; ++t)
            k.max_fixed_point_residual =
                std::max(k.max_fixed_point_residual, std::abs(ls.y[t] - w[t] + lin[t]));
    }
    return k;
}

double kernel_equation_residual(const DerivativeKernel& kernel, const Solution& z, const GridFunction& x,
                                const Coefficient& sigma, const CutoffSpec& spec) {
    const std::size_t n = x.n();
    if (kernel.n != n) throw InvalidInput("kernel_equation_residual: grid mismatch");
    const PsiData psi = psi_data(z, x, sigma, spec);
    std::vector<double> c(n), v(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = sigma.d1(z.z[i]) * (x[i + 1] - x[i]);
    double worst = 0.0;
    for (std::size_t s = 0; s <= n; ++s) {
        for (std::size_t i = 0; i < n; ++i) v[i] = c[i] * kernel.values(s, i);
        for (std::size_t t = 0; t <= n; ++t) {
            const double tt = x.t(t);
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double xi = x.t(i);
                acc += (std::min(tt, xi) - tt * xi) * v[i];
            }
            worst = std::max(worst, std::abs(kernel.values(s, t) - psi(s, t) - psi.G * acc));
        }
    }
    return worst;
}

GridFunction directional_derivative(const DerivativeKernel& kernel, const GridFunction& h) {
    const std::size_t n = kernel.n;
    if (h.n() != n) throw InvalidInput("directional_derivative: grid mismatch");
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t t = 0; t <= n; ++t) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += kernel.values(k, t) * (h[k + 1] - h[k]);
        out[t] = acc;
    }
    return GridFunction(std::move(out));
}

GridFunction finite_difference_derivative(const GridFunction& x, const GridFunction& h,
                                          const Coefficient& sigma, const CutoffSpec& spec,
                                          const SolverConfig& cfg, double eps) {
    require_same_grid(x, h, "finite_difference_derivative");
    if (!(eps > 0.0)) throw InvalidInput("finite_difference_derivative: eps must be positive");
    const Solution up = solve_elliptic(x + h * eps, sigma, spec, cfg);
    const Solution dn = solve_elliptic(x - h * eps, sigma, spec, cfg);
    return (up.z - dn.z) * (0.5 / eps);
}

double derivative_h_norm(const DerivativeKernel& kernel, double t, double H) {
    const std::size_t ti = GridFunction::constant(kernel.n, 0.0).node_index(t);
    const GridFunction col = kernel.column(ti);
    return std::sqrt(std::max(0.0, h_inner_product(col, col, H)));
}

StratoDecomposition strato_decomposition(const Solution& z, const DerivativeKernel& kernel,
                                         const GridFunction& x, const Coefficient& sigma, double t, double H,
                                         double trace_factor) {
    if (!(H > 0.5 && H < 1.0)) throw UnsupportedParameter("strato_decomposition needs 1/2 < H < 1");
    require_same_grid(z.z, x, "strato_decomposition");
    const std::size_t n = x.n();
    if (kernel.n != n) throw InvalidInput("strato_decomposition: grid mismatch");
    const std::size_t ti = x.node_index(t);
    const double G = z.cutoff_value;

    StratoDecomposition out;
    out.pathwise = G * kernel_integral_at(ti, sigma.apply(z.z), x);

    // D(xi_j, s_k) = K(t, xi_j) sigma'(z_j) Phi_{s_k}(xi_j) at nodes; averaged over the four corners of
    // each cell pair and integrated exactly against |xi - s|^{2H-2}.
    GridSquare D(n);
    bool any = false;
    for (std::size_t j = 0; j <= n; ++j) {
        const double coef = (std::min(t, x.t(j)) - t * x.t(j)) * sigma.d1(z.z[j]);
        for (std::size_t k = 0; k <= n; ++k) {
            D(j, k) = coef * kernel.values(k, j);
            any = any || D(j, k) != 0.0;
        }
    }
    if (!any) {
        out.skorohod = out.pathwise;
        return out;
    }
    const std::vector<double> W = fbm_cell_kernel(n, H);
    std::vector<double> signed_lag(n, 0.0), abs_lag(n, 0.0), buf_s, buf_a;
    for (std::size_t d = 0; d < n; ++d) {
        buf_s.clear();
        buf_a.clear();
        for (std::size_t a = 0; a < n; ++a) {
            for (int sgn : {1, -1}) {
                if (d == 0 && sgn == -1) continue;
                const std::ptrdiff_t b = static_cast<std::ptrdiff_t>(a) + sgn * static_cast<std::ptrdiff_t>(d);
                if (b < 0 || b >= static_cast<std::ptrdiff_t>(n)) continue;
                const auto bb = static_cast<std::size_t>(b);
                const double F = 0.25 * (D(a, bb) + D(a + 1, bb) + D(a, bb + 1) + D(a + 1, bb + 1));
                buf_s.push_back(F);
                buf_a.push_back(std::abs(F));
            }
        }
        signed_lag[d] = W[d] * pairwise_sum(buf_s);
        abs_lag[d] = W[d] * pairwise_sum(buf_a);
    }
    out.trace = trace_factor * G * pairwise_sum(signed_lag);
    out.trace_abs_integral = std::abs(trace_factor * G) * pairwise_sum(abs_lag);
    out.skorohod = out.pathwise - out.trace;
    return out;
}

SignPattern sign_pattern(const DerivativeKernel& kernel, double t) {
    const std::size_t n = kernel.n;
    const std::size_t ti = GridFunction::constant(n, 0.0).node_index(t);
    SignPattern sp;
    std::size_t negatives = 0, run = 0, best = 0, best_end = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (kernel.values(k + 1, ti) < kernel.values(k, ti)) {
            ++negatives;
            if (++run > best) {
                best = run;
                best_end = k + 1;
            }
        } else {
            run = 0;
        }
    }
    sp.negative_fraction = static_cast<double>(negatives) / static_cast<double>(n);
    if (best > 0) {
        sp.run_start = GridFunction::node_time(best_end - best, n);
        sp.run_end = GridFunction::node_time(best_end, n);
    }
    return sp;
}

}  // namespace ellipsde
