#pragma once

#include "ellipsde/grid.hpp"

namespace ellipsde {

struct YoungResult {
    double value = 0.0;
    double mesh = 0.0;             // grid spacing used
    double integrand_start = 0.0;  // g(s), the anchor of the sharp Young bound
};

/// Left-point Riemann sum of int_s^t g df over the grid cells in [s, t].
/// s and t must be nodes with s <= t; g and f must share the grid.
YoungResult young_integral(const GridFunction& g, const GridFunction& f, double s, double t);

/// Same sum addressed by node indices.
double young_sum(const GridFunction& g, const GridFunction& f, std::size_t i0, std::size_t i1);

/// Green kernel of -d^2/dt^2 on [0,1] with Dirichlet ends: min(t, xi) - t xi.
double elliptic_kernel(double t, double xi);

/// int_0^1 K(t, xi) w(xi) dx(xi) as a left-point Young sum; t must be a node.
double kernel_integral(double t, const GridFunction& w, const GridFunction& x);
double kernel_integral_at(std::size_t ti, const GridFunction& w, const GridFunction& x);

/// |difference| between the two iterated Young sums
///   int_s^t int_s^r h(r,u) dg_u df_r   and   int_s^t int_u^t h(r,u) df_r dg_u,
/// with h(r, u) = h(i, j) for r = i/n, u = j/n. Test oracle only.
double fubini_check(const GridSquare& h, const GridFunction& f, const GridFunction& g, double s, double t);

}  // namespace ellipsde
