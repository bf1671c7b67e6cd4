#include "ellipsde/young.hpp"

#include "ellipsde/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ellipsde {

double young_sum(const GridFunction& g, const GridFunction& f, std::size_t i0, std::size_t i1) {
    double s = 0.0;
    for (std::size_t i = i0; i < i1; ++i) s += g[i] * (f[i + 1] - f[i]);
    return s;
}

YoungResult young_integral(const GridFunction& g, const GridFunction& f, double s, double t) {
    require_same_grid(g, f, "young_integral");
    if (s > t) throw InvalidInput("young_integral: need s <= t");
    const std::size_t i0 = f.node_index(s);
    const std::size_t i1 = f.node_index(t);
    return {young_sum(g, f, i0, i1), f.h(), g[i0]};
}

double elliptic_kernel(double t, double xi) {
    if (!(t >= 0.0 && t <= 1.0 && xi >= 0.0 && xi <= 1.0))
        throw InvalidInput("elliptic_kernel: arguments must lie in [0,1]");
    return std::min(t, xi) - t * xi;
}

double kernel_integral_at(std::size_t ti, const GridFunction& w, const GridFunction& x) {
    require_same_grid(w, x, "kernel_integral");
    const std::size_t n = x.n();
    if (ti > n) throw InvalidInput("kernel_integral: node index out of range");
    const double t = x.t(ti);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x.t(i);
        s += (std::min(t, xi) - t * xi) * w[i] * (x[i + 1] - x[i]);
    }
    return s;
}

double kernel_integral(double t, const GridFunction& w, const GridFunction& x) {
    return kernel_integral_at(x.node_index(t), w, x);
}

double fubini_check(const GridSquare& h, const GridFunction& f, const GridFunction& g, double s, double t) {
    require_same_grid(f, g, "fubini_check");
    if (h.n() != f.n()) throw InvalidInput("fubini_check: grid mismatch");
    if (s > t) throw InvalidInput("fubini_check: need s <= t");
    const std::size_t i0 = f.node_index(s);
    const std::size_t i1 = f.node_index(t);

    // r outer: sum_i [ sum_{j in [i0, i)} h(i, j) dg_j ] df_i
    double r_outer = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
        double inner = 0.0;
        for (std::size_t j = i0; j < i; ++j) inner += h(i, j) * (g[j + 1] - g[j]);
        r_outer += inner * (f[i + 1] - f[i]);
    }
    // u outer: sum_j [ sum_{i in [j, i1)} h(i, j) df_i ] dg_j
    double u_outer = 0.0;
    for (std::size_t j = i0; j < i1; ++j) {
        double inner = 0.0;
        for (std::size_t i = j; i < i1; ++i) inner += h(i, j) * (f[i + 1] - f[i]);
        u_outer += inner * (g[j + 1] - g[j]);
    }
    return std::abs(r_outer - u_outer);
}

}  // namespace ellipsde
