#include "ellipsde/cutoff.hpp"
#include "ellipsde/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace ellipsde;

namespace {

CutoffSpec spec_of(double M, double gamma, int p, double eps, CutoffFlavor f) {
    CutoffSpec s;
    s.M = M;
    s.gamma = gamma;
    s.p = p;
    s.epsilon = eps;
    s.flavor = f;
    return s;
}

// Direct O(n^3) evaluation of the wedge kernel, same cell convention as the library but summed pair by pair.
double brute_mu_tilde(const GridFunction& x, double gamma, int p, std::size_t k, bool absolute) {
    const std::size_t n = x.n();
    const double h = 1.0 / n;
    double s = 0.0;
    for (std::size_t b = 0; b < n; ++b)
        for (std::size_t a = b + 2; a < n; ++a) {
            if (!(b < k && k <= a && a <= 4 * b + 1)) continue;
            const double d = (a - b) * h;
            const double inc = 0.5 * (x[a] + x[a + 1]) - 0.5 * (x[b] + x[b + 1]);
            const double r = 2.0 * p * std::pow(inc, 2 * p - 1) / std::pow(d, 2 * gamma * p + 2) * h * h;
            s += absolute ? std::abs(r) : r;
        }
    return s;
}

}  // namespace

TEST_CASE("phi_M plateaus and midpoint") {
    for (double M : {0.05, 1.0, 7.5}) {
        CHECK(phi_m(M / 2, M) == 1.0);
        CHECK(phi_m(M + 2, M) == 0.0);
        CHECK(phi_m(M + 0.5, M) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(phi_m(M, M) == 1.0);
        CHECK(phi_m(M + 1, M) == 0.0);
    }
    CHECK_THROWS_AS(phi_m(-0.1, 1.0), InvalidInput);
    CHECK_THROWS_AS(phi_m_prime(-0.1, 1.0), InvalidInput);
}

TEST_CASE("phi_M derivative matches centered differences and vanishes off the band") {
    const double M = 2.0, e = 1e-6;
    double worst = 0.0;
    for (double r = 0.0; r <= 4.0; r += 0.01) {
        const double fd = (phi_m(r + e, M) - phi_m(std::max(0.0, r - e), M)) / (r >= e ? 2 * e : r + e);
        const double d = phi_m_prime(r, M);
        CHECK(std::abs(fd) < 10.0);
        if (r < M || r > M + 1) CHECK(d == 0.0);
        if (r > M + 1e-3 && r < M + 1 - 1e-3) worst = std::max(worst, std::abs(fd - d));
        CHECK(d <= 0.0);
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("cutoff parameter validation") {
    CHECK_THROWS_AS(spec_of(0.0, 0.5, 2, 0.3, CutoffFlavor::Sobolev).validate(), InvalidInput);
    CHECK_THROWS_AS(spec_of(1.0, 1.0, 2, 0.3, CutoffFlavor::Sobolev).validate(), InvalidInput);
    CHECK_THROWS_AS(spec_of(1.0, 0.5, 0, 0.3, CutoffFlavor::Sobolev).validate(), InvalidInput);
    CHECK_THROWS_AS(spec_of(1.0, 0.5, 2, 0.25, CutoffFlavor::Sobolev).validate(), InvalidInput);
    CHECK_NOTHROW(spec_of(1.0, 0.5, 2, 0.25, CutoffFlavor::Garsia).validate());
    CHECK(parse_flavor("garsia") == CutoffFlavor::Garsia);
    CHECK_THROWS_AS(parse_flavor("besov"), InvalidInput);
    CHECK(spec_of(1.0, 0.1, 4, 0.55, CutoffFlavor::Garsia).malliavin_regime(0.75));
    CHECK_FALSE(spec_of(1.0, 0.3, 4, 0.55, CutoffFlavor::Garsia).malliavin_regime(0.75));
}

TEST_CASE("sobolev norm anchors") {
    CHECK(sobolev_norm(GridFunction::constant(64, 4.0), 0.5, 2) == 0.0);
    CHECK(sobolev_norm(testing::identity(256), 0.5, 2) == doctest::Approx(1.0).epsilon(0.02));
    // integrand |z - e|^{-1} on the square: grows like log n
    CHECK(sobolev_norm(testing::identity(512), 0.75, 2) > sobolev_norm(testing::identity(128), 0.75, 2));
    const auto f = ellipsde::make_path("sin:1:2", 64);
    CHECK(sobolev_power(f, 0.4, 3) == doctest::Approx(std::pow(sobolev_norm(f, 0.4, 3), 6)).epsilon(1e-12));
}

TEST_CASE("sobolev norm is stable under refinement for paths more regular than gamma + 1/(2p)") {
    // gamma = 0.3, p = 2: any epsilon > 1/4 qualifies, so C^0.7 and smoother paths.
    for (const char* d : {"sin:1:1", "sin:0.5:4", "weierstrass:0.8", "weierstrass:0.9:0.5"}) {
        const double a = sobolev_norm(ellipsde::make_path(d, 256), 0.3, 2);
        const double b = sobolev_norm(ellipsde::make_path(d, 512), 0.3, 2);
        INFO(d);
        CHECK(std::abs(b - a) / b < 0.05);
    }
}

TEST_CASE("garsia functional anchors") {
    CHECK(garsia_functional(GridFunction::constant(64, -1.0), 0.5, 2) == 0.0);
    CHECK(garsia_functional(testing::identity(256), 0.5, 2) == doctest::Approx(std::pow(3.0 / 8.0, 0.25)).epsilon(0.02));
    for (const auto& f : testing::corpus(128))
        for (double g : {0.2, 0.5}) CHECK(garsia_power(f, g, 2) <= sobolev_power(f, g, 2));
}

TEST_CASE("garsia inequality holds with one constant below 10 on the corpus") {
    double c = 0.0;
    for (const auto& d : testing::corpus_descriptors()) {
        const auto f = ellipsde::make_path(d, 256);
        c = std::max(c, holder_seminorm(f, 0.5) / garsia_functional(f, 0.5, 2));
    }
    MESSAGE("fitted corpus constant c = " << c);
    CHECK(c <= 10.0);
}

TEST_CASE("cutoff value anchors") {
    const auto s = spec_of(2.0, 0.5, 2, 0.3, CutoffFlavor::Sobolev);
    CHECK(cutoff_value(GridFunction::constant(32, 0.0), s) == 1.0);
    CHECK(cutoff_value(testing::identity(256) * 10.0, s) == 0.0);
    CHECK(cutoff_value(testing::identity(256), s) == 1.0);
    const auto st = evaluate_cutoff(testing::identity(256), s);
    CHECK(st.argument == doctest::Approx(1.0).epsilon(0.02));
    CHECK(st.prime == 0.0);
    auto g = s;
    g.flavor = CutoffFlavor::Garsia;
    CHECK(cutoff_argument(testing::identity(256), g) == doctest::Approx(3.0 / 8.0).epsilon(0.02));
}

TEST_CASE("mu kernel anchors") {
    const auto x = testing::identity(512);
    const auto mu = mu_kernel(x, 0.5, 2);
    CHECK(mu[0] == 0.0);
    CHECK(mu[512] == 0.0);
    CHECK(mu[256] == doctest::Approx(-4.0 * std::log(2.0)).epsilon(0.03));
}

TEST_CASE("mu tilde kernel matches a pair-by-pair sum and its absolute bound") {
    const auto x = ellipsde::make_path("fbm:0.75:9", 96);
    const auto mt = mu_tilde_kernel(x, 0.2, 2);
    CHECK(mt[0] == 0.0);
    for (std::size_t k = 1; k < 96; k += 5) {
        const double signed_sum = brute_mu_tilde(x, 0.2, 2, k, false);
        const double abs_sum = brute_mu_tilde(x, 0.2, 2, k, true);
        CHECK(std::abs(mt[k] - signed_sum) <= 1e-9 * abs_sum + 1e-15);
        CHECK(std::abs(mt[k]) <= abs_sum * (1 + 1e-12));
    }
    const auto alt = mu_tilde_kernel(x, 0.2, 2, RhoFactor::TwoPMinusOne);
    CHECK(alt[40] == doctest::Approx(mt[40] * 3.0 / 4.0).epsilon(1e-12));
}

TEST_CASE("mu tilde at s = 0.1 for the identity agrees with a million-cell midpoint sum") {
    // x = t, p = 2, gamma = 1/2: rho = 4 / (z - e) on e in (s/4, s), z in (s, 4e).
    const double s = 0.1;
    const int m = 1000;
    const double he = (s - s / 4) / m, hz = (4 * s - s) / m;
    double ref = 0.0;
    for (int i = 0; i < m; ++i) {
        const double e = s / 4 + (i + 0.5) * he;
        for (int j = 0; j < m; ++j) {
            const double z = s + (j + 0.5) * hz;
            if (z < 4 * e) ref += 4.0 / (z - e) * he * hz;
        }
    }
    const auto mt = mu_tilde_kernel(testing::identity(2000), 0.5, 2);
    MESSAGE("brute force " << ref << ", kernel " << mt[200]);
    CHECK(mt[200] == doctest::Approx(ref).epsilon(0.01));
}

TEST_CASE("derivative pairing vanishes where it should") {
    const auto x = testing::identity(128);
    const auto s = spec_of(5.0, 0.5, 2, 0.3, CutoffFlavor::Sobolev);
    const auto h = ellipsde::make_path("sin:1:3", 128);
    CHECK(dgm_pairing(x, h, s).value == 0.0);
    CHECK(dgm_pairing(x * 3.0, h, s).value == 0.0);  // beyond M + 1
    auto band = s;
    for (auto f : {CutoffFlavor::Sobolev, CutoffFlavor::Garsia}) {
        band.flavor = f;
        band.M = cutoff_argument(x * 2.0, band) - 0.5;
        const auto p = dgm_pairing(x * 2.0, GridFunction::constant(128, 2.0), band);
        CHECK(p.double_integral_form == 0.0);
        CHECK(p.young_form == 0.0);
    }
}

TEST_CASE("derivative pairing: double integral and kernel forms agree within 1 percent") {
    const std::size_t n = 512;
    for (auto f : {CutoffFlavor::Sobolev, CutoffFlavor::Garsia}) {
        auto s = spec_of(1.0, 0.5, 2, 0.3, f);
        const double base = cutoff_argument(testing::identity(n), s);
        const double A = std::pow(1.5 / base, 0.25);  // norm power 1.5, inside (M, M+1)
        const auto x = testing::identity(n) * A;
        const auto st = evaluate_cutoff(x, s);
        REQUIRE(st.prime != 0.0);
        const auto p = dgm_pairing(x, testing::identity(n), s);
        INFO(to_string(f) << ": double integral " << p.double_integral_form << " kernel " << p.young_form);
        CHECK(p.value == p.double_integral_form);
        CHECK(p.young_form == doctest::Approx(p.double_integral_form).epsilon(0.01));
    }
}

TEST_CASE("derivative weights reproduce central differences of the cutoff") {
    const std::size_t n = 200;
    const auto x = GridFunction::sample(n, [](double t) { return 1.1 * t + 0.2 * std::sin(5 * t); });
    const auto h = GridFunction::sample(n, [](double t) { return std::cos(3 * t) - t; });
    for (auto f : {CutoffFlavor::Sobolev, CutoffFlavor::Garsia}) {
        auto s = spec_of(1.0, 0.4, 2, 0.3, f);
        s.M = cutoff_argument(x, s) - 0.3;
        const auto m = cutoff_derivative_weights(x, s);
        double lin = 0.0;
        for (std::size_t k = 0; k < n; ++k) lin += m[k] * (h[k + 1] - h[k]);
        const double e = 1e-5;
        const double fd = (cutoff_value(x + h * e, s) - cutoff_value(x - h * e, s)) / (2 * e);
        INFO(to_string(f));
        CHECK(lin == doctest::Approx(fd).epsilon(1e-7));
        CHECK(m[n] == 0.0);
    }
}

TEST_CASE("mu tilde bound near zero on fBm samples") {
    const double gamma = 0.1, eps = 0.55;
    const int p = 4;
    const double beta = (2 * p - 1) * eps - gamma;
    for (int k = 0; k < 3; ++k) {
        const auto B = ellipsde::sample_fbm({0.75, 256, static_cast<std::uint64_t>(300 + k)});
        const auto mt = mu_tilde_kernel(B, gamma, p);
        const double c = std::pow(holder_norm(B, gamma + eps).norm, 2 * p - 1);
        for (std::size_t i = 1; i < 64; ++i) CHECK(std::abs(mt[i]) <= 1.05 * c * std::pow(i / 256.0, beta));
    }
}
