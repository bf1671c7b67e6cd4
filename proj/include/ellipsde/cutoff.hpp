#pragma once

#include "ellipsde/grid.hpp"

#include <string>
#include <vector>

namespace ellipsde {

enum class CutoffFlavor { Sobolev, Garsia };

CutoffFlavor parse_flavor(const std::string& name);
std::string to_string(CutoffFlavor f);

/// Localization parameters: level M, path exponent gamma, integrability p, regularity margin epsilon.
struct CutoffSpec {
    double M = 1.0;
    double gamma = 0.5;
    int p = 2;
    double epsilon = 0.3;
    CutoffFlavor flavor = CutoffFlavor::Sobolev;

    /// Throws InvalidInput on M <= 0, gamma outside (0,1), p < 1, epsilon <= 0,
    /// or epsilon <= 1/(2p) for the Sobolev flavor.
    void validate() const;

    /// epsilon > 2/p and gamma + epsilon < H: the regime where the derivative has finite |H| norm.
    bool malliavin_regime(double H) const { return epsilon > 2.0 / p && gamma + epsilon < H; }
};

/// Smooth cutoff: 1 on [0, M], 0 on [M+1, inf), logistic blend of exp(-1/u) bumps in between.
double phi_m(double r, double M);
double phi_m_prime(double r, double M);

/// Discrete (int int (f(z)-f(e))^{2p} / |z-e|^{2p gamma + 2})^{1/(2p)}: midpoint rule on grid cells,
/// cells touching the diagonal (|a-b| <= 1) dropped.
double sobolev_norm(const GridFunction& f, double gamma, int p);
/// sobolev_norm^{2p}, without the root.
double sobolev_power(const GridFunction& f, double gamma, int p);

/// Same integrand restricted to the wedge v < u < min(4v, 1).
double garsia_functional(const GridFunction& f, double gamma, int p);
double garsia_power(const GridFunction& f, double gamma, int p);

/// The 2p-th power fed to phi_M: sobolev_power or garsia_power depending on flavor.
double cutoff_argument(const GridFunction& x, const CutoffSpec& spec);
double cutoff_value(const GridFunction& x, const CutoffSpec& spec);
double cutoff_prime(const GridFunction& x, const CutoffSpec& spec);

struct CutoffState {
    double argument = 0.0;  // norm power
    double value = 1.0;     // phi_M(argument)
    double prime = 0.0;     // phi_M'(argument)
};
CutoffState evaluate_cutoff(const GridFunction& x, const CutoffSpec& spec);

/// mu_s = int_0^s int_s^1 rho, rho = 2p (x_z - x_e)^{2p-1} / |z-e|^{2 gamma p + 2}, at every node s.
GridFunction mu_kernel(const GridFunction& x, double gamma, int p);

enum class RhoFactor { TwoP, TwoPMinusOne };

/// mu~_s = int_{s/4}^s de int_s^{4e ^ 1} dz rho(z, e). The leading factor of rho is 2p by default.
GridFunction mu_tilde_kernel(const GridFunction& x, double gamma, int p, RhoFactor factor = RhoFactor::TwoP);

/// Both evaluations of the cutoff derivative DG(x).h.
struct DgmPairing {
    double double_integral_form = 0.0;  // direct double sum of rho * (h_z - h_e)
    double young_form = 0.0;            // Young sum of h against the mu (or mu~) kernel
    double value = 0.0;                 // = double_integral_form
};
DgmPairing dgm_pairing(const GridFunction& x, const GridFunction& h, const CutoffSpec& spec);

/// Weights m_0..m_{n-1} (m_n = 0) with DG(x).h = sum_k m_k (h_{k+1} - h_k) exactly for the
/// discrete functional used by cutoff_value. They are the cell averages of the node kernel,
/// scaled by phi_M' and the flavor's orientation factor.
std::vector<double> cutoff_derivative_weights(const GridFunction& x, const CutoffSpec& spec);

}  // namespace ellipsde
