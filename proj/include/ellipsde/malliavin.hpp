#pragma once

#include "ellipsde/coefficient.hpp"
#include "ellipsde/cutoff.hpp"
#include "ellipsde/grid.hpp"
#include "ellipsde/solver.hpp"

#include <vector>

namespace ellipsde {

/// Phi_s(t) on the grid square: values(i, j) = Phi_{i/n}(j/n). Row s is the response to a
/// unit impulse at s; column t is the Malliavin derivative D_. z_t.
struct DerivativeKernel {
    std::size_t n = 0;
    GridSquare values;
    CutoffFlavor flavor = CutoffFlavor::Sobolev;
    double cutoff_value = 1.0;
    std::vector<int> iterations;       // per row s
    double max_contraction_ratio = 0.0;
    double max_fixed_point_residual = 0.0;  // sup over rows of |Phi_s - Psi_s - G int K sigma'(z) Phi_s dx|

    GridFunction row(std::size_t s) const { return values.row(s); }
    GridFunction column(std::size_t t) const { return values.column(t); }
};

/// Ingredients of Psi_s(t) = G sigma(z_s) K(t, s) + m_s I_t, where I_t = int K(t, .) sigma(z) dx is
/// the un-localized Green integral (so z = G I) and m_s are the cell weights of DG(x).
struct PsiData {
    double G = 1.0;
    GridFunction sigma_z;
    std::vector<double> m;  // m_0..m_n, m_n = 0
    std::vector<double> I;  // I_t at every node

    double operator()(std::size_t s, std::size_t t) const;
};

PsiData psi_data(const Solution& z, const GridFunction& x, const Coefficient& sigma, const CutoffSpec& spec);

/// Psi_s(t) for nodes s and t.
double psi_kernel(double s, double t, const Solution& z, const GridFunction& x, const Coefficient& sigma,
                  const CutoffSpec& spec);

/// One linear solve per node s with w = Psi_s and the linear part G int K sigma'(z) Phi_s dx.
/// A DivergenceError names the node s whose solve failed.
DerivativeKernel malliavin_kernel(const Solution& z, const GridFunction& x, const Coefficient& sigma,
                                  const CutoffSpec& spec, const SolverConfig& cfg);

/// max over all nodes (s, t) of |Phi_s(t) - Psi_s(t) - G sum_i K(t, xi_i) sigma'(z_i) Phi_s(xi_i) dx_i|,
/// evaluated with the compact kernel sums. O(n^3).
double kernel_equation_residual(const DerivativeKernel& kernel, const Solution& z, const GridFunction& x,
                                const Coefficient& sigma, const CutoffSpec& spec);

/// (Dz(x).h)_t = sum_k Phi_{s_k}(t) (h_{k+1} - h_k) at every node t.
GridFunction directional_derivative(const DerivativeKernel& kernel, const GridFunction& h);

/// Central difference (z(x + eps h) - z(x - eps h)) / (2 eps) from two full solves.
GridFunction finite_difference_derivative(const GridFunction& x, const GridFunction& h,
                                          const Coefficient& sigma, const CutoffSpec& spec,
                                          const SolverConfig& cfg, double eps);

/// |D z_t|_{|H|} = sqrt <Phi_.(t), Phi_.(t)>_{|H|}, clamped at 0.
double derivative_h_norm(const DerivativeKernel& kernel, double t, double H);

struct StratoDecomposition {
    double pathwise = 0.0;
    double trace = 0.0;
    double skorohod = 0.0;        // pathwise - trace
    double trace_abs_integral = 0.0;  // same double integral with |integrand|; finite iff integrable
};

/// Splits the Young value z_t into Skorohod part plus trace term
///   trace = factor G int int K(t, xi) sigma'(z_xi) Phi_s(xi) |xi - s|^{2H-2} ds dxi.
StratoDecomposition strato_decomposition(const Solution& z, const DerivativeKernel& kernel,
                                         const GridFunction& x, const Coefficient& sigma, double t, double H,
                                         double trace_factor = 1.0);

/// Sign structure of s -> Phi_s(t): longest run of consecutive nodes with negative increments.
struct SignPattern {
    double negative_fraction = 0.0;  // share of cells with Phi_{s+1}(t) < Phi_s(t)
    double run_start = 0.0;          // [run_start, run_end] in s; both 0 when no increment is negative
    double run_end = 0.0;
};
SignPattern sign_pattern(const DerivativeKernel& kernel, double t);

}  // namespace ellipsde
