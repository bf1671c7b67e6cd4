#pragma once

#include "ellipsde/grid.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>

namespace ellipsde {

/// Diffusion coefficient sigma with its first two derivatives and declared sup bounds.
///
/// Built from a descriptor string:
///   const:c        sigma(y) = c
///   tanh:a0,a1     sigma(y) = a0 + a1 tanh(y)
///   sin:a0,a1      sigma(y) = a0 + a1 sin(y)
/// Each family has closed-form bounds for |sigma|, |sigma'|, |sigma''| and, when |a0| > |a1|,
/// the nondegeneracy level sigma0 = |a0| - |a1|.
class Coefficient {
public:
    using Fn = std::function<double(double)>;

    Coefficient(std::string descriptor, Fn f, Fn d1, Fn d2, std::array<double, 3> sup_bounds,
                std::optional<double> sigma0);

    static Coefficient parse(const std::string& descriptor);
    static Coefficient constant(double c);

    double operator()(double y) const { return f_(y); }
    double d1(double y) const { return d1_(y); }
    double d2(double y) const { return d2_(y); }

    GridFunction apply(const GridFunction& z) const { return z.map(f_); }
    GridFunction apply_d1(const GridFunction& z) const { return z.map(d1_); }

    const std::array<double, 3>& sup_bounds() const noexcept { return sup_; }
    const std::optional<double>& sigma0() const noexcept { return sigma0_; }
    const std::string& descriptor() const noexcept { return descriptor_; }

    /// True when the declared bounds dominate |sigma^(j)| on `samples` equispaced points of [-50, 50].
    bool verify_bounds(std::size_t samples = 100000) const;

private:
    std::string descriptor_;
    Fn f_, d1_, d2_;
    std::array<double, 3> sup_;
    std::optional<double> sigma0_;
};

/// (M+1) max_j ||sigma^(j)||_inf: the smallest c1 for which ||sigma^(j)|| <= c1/(M+1) holds.
/// The existence theory asks for this to be small (at least below 1).
struct SmallnessReport {
    double implied_constant = 0.0;
    bool below_one = false;
};
SmallnessReport coefficient_smallness(const Coefficient& sigma, double M);

}  // namespace ellipsde
