#include "ellipsde/cutoff.hpp"

#include "ellipsde/errors.hpp"

#include <algorithm>
#include <cmath>

namespace ellipsde {

CutoffFlavor parse_flavor(const std::string& name) {
    if (name == "sobolev") return CutoffFlavor::Sobolev;
    if (name == "garsia") return CutoffFlavor::Garsia;
    throw InvalidInput("unknown cutoff flavor '" + name + "' (expected sobolev|garsia)");
}

std::string to_string(CutoffFlavor f) { return f == CutoffFlavor::Sobolev ? "sobolev" : "garsia"; }

void CutoffSpec::validate() const {
    if (!(M > 0.0)) throw InvalidInput("cutoff: M must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("cutoff: gamma must lie in (0,1)");
    if (p < 1) throw InvalidInput("cutoff: p must be >= 1");
    if (!(epsilon > 0.0)) throw InvalidInput("cutoff: epsilon must be positive");
    if (flavor == CutoffFlavor::Sobolev && !(epsilon > 1.0 / (2.0 * p)))
        throw InvalidInput("cutoff: sobolev flavor needs epsilon > 1/(2p)");
}

double phi_m(double r, double M) {
    if (!(r >= 0.0)) throw InvalidInput("phi_M: argument must be nonnegative");
    if (r <= M) return 1.0;
    if (r >= M + 1.0) return 0.0;
    const double a = M + 1.0 - r;  // distance to the upper plateau edge
    const double b = r - M;
    // h(a) / (h(a) + h(b)) with h(u) = exp(-1/u) is the logistic function of 1/b - 1/a.
    const double d = 1.0 / b - 1.0 / a;
    if (d >= 0.0) return 1.0 / (1.0 + std::exp(-d));
    const double e = std::exp(d);
    return e / (1.0 + e);
}

double phi_m_prime(double r, double M) {
    if (!(r >= 0.0)) throw InvalidInput("phi_M': argument must be nonnegative");
    if (r <= M || r >= M + 1.0) return 0.0;
    const double a = M + 1.0 - r;
    const double b = r - M;
    const double d = 1.0 / b - 1.0 / a;
    const double e = std::exp(-std::abs(d));
    const double logistic_slope = e / ((1.0 + e) * (1.0 + e));
    if (logistic_slope == 0.0) return 0.0;
    return -logistic_slope * (1.0 / (a * a) + 1.0 / (b * b));
}

namespace {

double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

// Cell midpoint values of the piecewise-linear interpolant.
std::vector<double> midpoints(const GridFunction& f) {
    std::vector<double> m(f.n());
    for (std::size_t a = 0; a < f.n(); ++a) m[a] = 0.5 * (f[a] + f[a + 1]);
    return m;
}

// Cell-area-weighted |z-e|^{-(2p gamma + 2)} for midpoint lag d cells; entries 0 and 1 unused.
std::vector<double> lag_weights(std::size_t n, double gamma, int p) {
    std::vector<double> w(n + 1, 0.0);
    const double nn = static_cast<double>(n);
    const double expo = -(2.0 * p * gamma + 2.0);
    for (std::size_t d = 2; d <= n; ++d) w[d] = std::pow(static_cast<double>(d) / nn, expo) / (nn * nn);
    return w;
}

// Largest u-cell index paired with v-cell b in the wedge: u-midpoint < 4 * v-midpoint.
std::size_t wedge_end(std::size_t b, std::size_t n) { return std::min(4 * b + 1, n - 1); }

}  // namespace

double sobolev_power(const GridFunction& f, double gamma, int p) {
    const std::size_t n = f.n();
    const auto X = midpoints(f);
    const auto w = lag_weights(n, gamma, p);
    std::vector<double> rows(n, 0.0), buf;
    buf.reserve(n);
    for (std::size_t a = 0; a < n; ++a) {
        buf.clear();
        for (std::size_t b = a + 2; b < n; ++b) buf.push_back(ipow(X[b] - X[a], 2 * p) * w[b - a]);
        rows[a] = pairwise_sum(buf);
    }
    return 2.0 * pairwise_sum(rows);
}

double sobolev_norm(const GridFunction& f, double gamma, int p) {
    return std::pow(sobolev_power(f, gamma, p), 1.0 / (2.0 * p));
}

double garsia_power(const GridFunction& f, double gamma, int p) {
    const std::size_t n = f.n();
    const auto X = midpoints(f);
    const auto w = lag_weights(n, gamma, p);
    std::vector<double> rows(n, 0.0), buf;
    buf.reserve(n);
    for (std::size_t b = 0; b < n; ++b) {
        buf.clear();
        const std::size_t end = wedge_end(b, n);
        for (std::size_t a = b + 2; a <= end; ++a) buf.push_back(ipow(X[a] - X[b], 2 * p) * w[a - b]);
        rows[b] = pairwise_sum(buf);
    }
    return pairwise_sum(rows);
}

double garsia_functional(const GridFunction& f, double gamma, int p) {
    return std::pow(garsia_power(f, gamma, p), 1.0 / (2.0 * p));
}

double cutoff_argument(const GridFunction& x, const CutoffSpec& spec) {
    return spec.flavor == CutoffFlavor::Sobolev ? sobolev_power(x, spec.gamma, spec.p)
                                                : garsia_power(x, spec.gamma, spec.p);
}

CutoffState evaluate_cutoff(const GridFunction& x, const CutoffSpec& spec) {
    CutoffState s;
    s.argument = cutoff_argument(x, spec);
    s.value = phi_m(s.argument, spec.M);
    s.prime = phi_m_prime(s.argument, spec.M);
    return s;
}

double cutoff_value(const GridFunction& x, const CutoffSpec& spec) { return evaluate_cutoff(x, spec).value; }
double cutoff_prime(const GridFunction& x, const CutoffSpec& spec) { return evaluate_cutoff(x, spec).prime; }

GridFunction mu_kernel(const GridFunction& x, double gamma, int p) {
    const std::size_t n = x.n();
    const auto X = midpoints(x);
    const auto w = lag_weights(n, gamma, p);
    auto rho = [&](std::size_t a, std::size_t b) {  // a < b: z-cell a, e-cell b
        return 2.0 * p * ipow(X[a] - X[b], 2 * p - 1) * w[b - a];
    };
    // mu_k sums rho over cell pairs a < k <= b. Moving the node from k to k+1 adds the pairs
    // with a = k and drops the pairs with b = k.
    std::vector<double> mu(n + 1, 0.0), buf;
    buf.reserve(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        buf.clear();
        for (std::size_t b = k + 2; b < n; ++b) buf.push_back(rho(k, b));
        const double added = pairwise_sum(buf);
        buf.clear();
        for (std::size_t a = 0; a + 2 <= k; ++a) buf.push_back(rho(a, k));
        const double dropped = pairwise_sum(buf);
        mu[k + 1] = mu[k] + added - dropped;
    }
    mu[n] = 0.0;
    return GridFunction(std::move(mu));
}

GridFunction mu_tilde_kernel(const GridFunction& x, double gamma, int p, RhoFactor factor) {
    const std::size_t n = x.n();
    const auto X = midpoints(x);
    const auto w = lag_weights(n, gamma, p);
    const double lead = factor == RhoFactor::TwoP ? 2.0 * p : 2.0 * p - 1.0;
    auto rho = [&](std::size_t b, std::size_t a) {  // e-cell b < z-cell a inside the wedge
        return lead * ipow(X[a] - X[b], 2 * p - 1) * w[a - b];
    };
    std::vector<double> mu(n + 1, 0.0), buf;
    buf.reserve(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        buf.clear();
        for (std::size_t a = k + 2; a <= wedge_end(k, n); ++a) buf.push_back(rho(k, a));
        const double added = pairwise_sum(buf);
        buf.clear();
        for (std::size_t b = 0; b + 2 <= k; ++b)
            if (k <= wedge_end(b, n)) buf.push_back(rho(b, k));
        const double dropped = pairwise_sum(buf);
        mu[k + 1] = mu[k] + added - dropped;
    }
    mu[n] = 0.0;
    return GridFunction(std::move(mu));
}

namespace {

// Sobolev: DG.h = -2 phi' int mu dh. Garsia: DG.h = phi' int mu~ dh (wedge is one-sided).
double orientation(CutoffFlavor f) { return f == CutoffFlavor::Sobolev ? -2.0 : 1.0; }

GridFunction node_kernel(const GridFunction& x, const CutoffSpec& spec) {
    return spec.flavor == CutoffFlavor::Sobolev ? mu_kernel(x, spec.gamma, spec.p)
                                                : mu_tilde_kernel(x, spec.gamma, spec.p);
}

}  // namespace

DgmPairing dgm_pairing(const GridFunction& x, const GridFunction& h, const CutoffSpec& spec) {
    require_same_grid(x, h, "dgm_pairing");
    spec.validate();
    const auto state = evaluate_cutoff(x, spec);
    DgmPairing out;
    if (state.prime == 0.0) return out;

    const std::size_t n = x.n();
    const auto X = midpoints(x);
    const auto Hm = midpoints(h);
    const auto w = lag_weights(n, spec.gamma, spec.p);
    const int p = spec.p;
    std::vector<double> rows(n, 0.0), buf;
    buf.reserve(n);
    if (spec.flavor == CutoffFlavor::Sobolev) {
        // Full square is symmetric: twice the a < b half.
        for (std::size_t a = 0; a < n; ++a) {
            buf.clear();
            for (std::size_t b = a + 2; b < n; ++b)
                buf.push_back(2.0 * p * ipow(X[a] - X[b], 2 * p - 1) * w[b - a] * (Hm[a] - Hm[b]));
            rows[a] = pairwise_sum(buf);
        }
        out.double_integral_form = state.prime * 2.0 * pairwise_sum(rows);
    } else {
        for (std::size_t b = 0; b < n; ++b) {
            buf.clear();
            for (std::size_t a = b + 2; a <= wedge_end(b, n); ++a)
                buf.push_back(2.0 * p * ipow(X[a] - X[b], 2 * p - 1) * w[a - b] * (Hm[a] - Hm[b]));
            rows[b] = pairwise_sum(buf);
        }
        out.double_integral_form = state.prime * pairwise_sum(rows);
    }

    const auto mu = node_kernel(x, spec);
    double young = 0.0;
    for (std::size_t k = 0; k < n; ++k) young += mu[k] * (h[k + 1] - h[k]);
    out.young_form = state.prime * orientation(spec.flavor) * young;
    out.value = out.double_integral_form;
    return out;
}

std::vector<double> cutoff_derivative_weights(const GridFunction& x, const CutoffSpec& spec) {
    const std::size_t n = x.n();
    std::vector<double> m(n + 1, 0.0);
    const double prime = cutoff_prime(x, spec);
    if (prime == 0.0) return m;
    const auto mu = node_kernel(x, spec);
    const double scale = prime * orientation(spec.flavor) * 0.5;
    for (std::size_t k = 0; k < n; ++k) m[k] = scale * (mu[k] + mu[k + 1]);
    return m;
}

}  // namespace ellipsde
