#pragma once

#include "ellipsde/coefficient.hpp"
#include "ellipsde/cutoff.hpp"
#include "ellipsde/grid.hpp"

#include <span>
#include <vector>

namespace ellipsde {

struct SolverConfig {
    double kappa = 0.9;  // Hölder exponent of the solution space
    double tol = 1e-12;  // stop when the kappa-norm of the last update drops below this
    int max_iters = 200;
    double K_ball = 2.0;  // invariant-ball radius, reported only

    /// Throws InvalidInput unless gamma + kappa > 1, kappa in (0,1), tol > 0, max_iters >= 1, K_ball > 1.
    void validate(double gamma) const;
};

/// Diagnostics shared by the nonlinear and linear fixed-point loops.
struct IterationStats {
    int iterations = 0;
    double contraction_ratio = 0.0;       // max_k |u^{k+1}-u^k|_kappa / |u^k-u^{k-1}|_kappa
    std::vector<double> increments;       // |u^{k+1}-u^k|_kappa per iteration
    std::vector<double> ratios;
};

struct Solution {
    GridFunction z;
    IterationStats stats;
    double residual = 0.0;  // sup_t |z_t - G int K(t,.) sigma(z) dx|
    double cutoff_value = 1.0;
    double cutoff_argument = 0.0;
    double z_kappa_norm = 0.0;
    bool in_ball = true;  // |z|_kappa <= K_ball
    SmallnessReport smallness;

    int iterations() const noexcept { return stats.iterations; }
    double contraction_ratio() const noexcept { return stats.contraction_ratio; }
};

/// Given a_i = (integrand)_i (x_{i+1} - x_i) for cells i = 0..n-1, returns the node values
///   int_0^t du (sum_{xi_i >= u} a_i) - t sum_i xi_i a_i
/// by one backward suffix pass. The du integral is exact for the step function in u, so the
/// result equals sum_i K(t, xi_i) a_i at every node.
std::vector<double> green_apply(std::span<const double> weighted_increments);

/// One application of the Picard map with sigma_M(x, y) = G(x) sigma(y).
GridFunction gamma_map(const GridFunction& z, const GridFunction& x, const Coefficient& sigma,
                       const CutoffSpec& spec);
GridFunction gamma_map(const GridFunction& z, const GridFunction& x, const Coefficient& sigma, double G);

/// Fixed point of gamma_map started from z = 0. Throws DivergenceError if an update ratio
/// reaches 1 or max_iters is exhausted.
Solution solve_elliptic(const GridFunction& x, const Coefficient& sigma, const CutoffSpec& spec,
                        const SolverConfig& cfg);

/// sup_t |z_t - G sum_i K(t, xi_i) sigma(z_i) dx_i| using the compact kernel sums.
double compact_residual(const GridFunction& z, const GridFunction& x, const Coefficient& sigma, double G);

struct LinearSolution {
    GridFunction y;
    IterationStats stats;
    double norm_ratio = 0.0;        // |y|_kappa / |w|_kappa (0 when w = 0)
    double r_kappa_norm = 0.0;
    double implied_constant = 0.0;  // (M+1) |R|_kappa
};

/// Solves y_t = w_t - G int_0^1 K(t, xi) R_xi y_xi dx_xi by fixed point from y = w.
LinearSolution solve_linear(const GridFunction& w, const GridFunction& R, const GridFunction& x,
                            const CutoffSpec& spec, const SolverConfig& cfg);

/// Precomputed affine map y -> w - green_apply(G R y dx), reusable across many right-hand sides.
class LinearOperator {
public:
    LinearOperator(const GridFunction& R, const GridFunction& x, double G);

    /// green_apply of G R_i y_i dx_i at every node.
    std::vector<double> apply(const GridFunction& y) const;
    LinearSolution solve(const GridFunction& w, const SolverConfig& cfg) const;
    double r_kappa_norm(double kappa) const;

private:
    GridFunction R_;
    std::vector<double> weights_;  // G R_i (x_{i+1} - x_i)
};

}  // namespace ellipsde
