#pragma once

#include "ellipsde/grid.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace ellipsde {

struct FbmConfig {
    double H = 0.75;
    std::size_t n = 256;
    std::uint64_t seed = 1;

    void validate() const;
};

/// R_H(s, t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double s, double t, double H);

/// Counter-based generator: draw k of stream j under seed s is a pure function of (s, j, k),
/// so per-sample streams can be consumed in any order or thread.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    /// Uniform in the open interval (0, 1).
    double uniform();
    /// Standard normal by Box-Muller on two consecutive uniforms.
    double normal();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Lower Cholesky factor of the covariance of (B_{1/n}, ..., B_1), with 1e-12 added to the diagonal.
class FbmCholesky {
public:
    static constexpr double kJitter = 1e-12;

    FbmCholesky(double H, std::size_t n);

    /// Shared factor for (H, n); built once per process and never mutated afterwards.
    static std::shared_ptr<const FbmCholesky> cached(double H, std::size_t n);

    double H() const noexcept { return H_; }
    std::size_t n() const noexcept { return n_; }
    double lower(std::size_t i, std::size_t j) const noexcept { return L_[i * n_ + j]; }

    /// max |L L^T - C| / max |C| over all entries (C without jitter).
    double reconstruction_error() const;

    /// Path with value 0 at node 0 and L * normals at nodes 1..n.
    GridFunction apply(std::span<const double> normals) const;

private:
    double H_;
    std::size_t n_;
    std::vector<double> L_;  // dense row-major n x n, upper triangle zero
};

/// Exact fBm path on the grid. Sample `stream` of a Monte Carlo run uses stream index = sample index.
GridFunction sample_fbm(const FbmConfig& cfg, std::uint64_t stream = 0);

/// <phi, psi>_{|H|} = H(2H-1) int int phi_r psi_u |r-u|^{2H-2}, with phi and psi taken cell-constant
/// (cell midpoint values) and the kernel integrated exactly over each pair of cells.
/// Throws UnsupportedParameter unless 1/2 < H < 1.
double h_inner_product(const GridFunction& phi, const GridFunction& psi, double H);

/// Exact integral of |r-u|^{2H-2} over two grid cells whose indices differ by d, for d = 0..n.
std::vector<double> fbm_cell_kernel(std::size_t n, double H);

}  // namespace ellipsde
