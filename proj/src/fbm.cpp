#include "ellipsde/fbm.hpp"

#include "ellipsde/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

namespace ellipsde {

void FbmConfig::validate() const {
    if (!(H > 0.0 && H < 1.0)) throw InvalidInput("fbm: H must lie in (0,1)");
    if (n < 2) throw InvalidInput("fbm: n must be >= 2");
}

double fbm_covariance(double s, double t, double H) {
    const double e = 2.0 * H;
    return 0.5 * (std::pow(s, e) + std::pow(t, e) - std::pow(std::abs(t - s), e));
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}
}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t CounterRng::next_u64() {
    return splitmix64(key_ + 0xD1B54A32D192ED03ULL * (++counter_));
}

double CounterRng::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

FbmCholesky::FbmCholesky(double H, std::size_t n) : H_(H), n_(n) {
    FbmConfig{H, n, 0}.validate();
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd C(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
            C(i, j) = fbm_covariance(GridFunction::node_time(static_cast<std::size_t>(i) + 1, n),
                                     GridFunction::node_time(static_cast<std::size_t>(j) + 1, n), H);
    C.diagonal().array() += kJitter;
    Eigen::LLT<Eigen::MatrixXd> llt(C);
    if (llt.info() != Eigen::Success)
        throw NumericalError("fbm covariance is not numerically positive definite");
    const Eigen::MatrixXd L = llt.matrixL();
    L_.resize(n * n);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) L_[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] = L(i, j);
}

std::shared_ptr<const FbmCholesky> FbmCholesky::cached(double H, std::size_t n) {
    static std::mutex mtx;
    static std::map<std::pair<double, std::size_t>, std::shared_ptr<const FbmCholesky>> cache;
    std::lock_guard lock(mtx);
    auto& slot = cache[{H, n}];
    if (!slot) slot = std::make_shared<const FbmCholesky>(H, n);
    return slot;
}

double FbmCholesky::reconstruction_error() const {
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k <= j; ++k) s += lower(i, k) * lower(j, k);
            const double c = fbm_covariance(GridFunction::node_time(i + 1, n_),
                                            GridFunction::node_time(j + 1, n_), H_);
            worst = std::max(worst, std::abs(s - c));
            scale = std::max(scale, std::abs(c));
        }
    return worst / scale;
}

GridFunction FbmCholesky::apply(std::span<const double> normals) const {
    if (normals.size() != n_) throw InvalidInput("FbmCholesky::apply: expected n normals");
    std::vector<double> v(n_ + 1, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        const double* row = &L_[i * n_];
        for (std::size_t k = 0; k <= i; ++k) s += row[k] * normals[k];
        v[i + 1] = s;
    }
    return GridFunction(std::move(v));
}

GridFunction sample_fbm(const FbmConfig& cfg, std::uint64_t stream) {
    cfg.validate();
    const auto factor = FbmCholesky::cached(cfg.H, cfg.n);
    CounterRng rng(cfg.seed, stream);
    std::vector<double> z(cfg.n);
    for (auto& v : z) v = rng.normal();
    return factor->apply(z);
}

std::vector<double> fbm_cell_kernel(std::size_t n, double H) {
    // int_0^1 int_0^1 |x - y + d|^{2H-2} dx dy = (|d+1|^{2H} - 2|d|^{2H} + |d-1|^{2H}) / (2H(2H-1)),
    // scaled by h^{2H} for cells of width h.
    const double e = 2.0 * H;
    const double denom = e * (e - 1.0);
    const double scale = std::pow(1.0 / static_cast<double>(n), e);
    std::vector<double> w(n + 1);
    for (std::size_t d = 0; d <= n; ++d) {
        const double dd = static_cast<double>(d);
        w[d] = scale * (std::pow(dd + 1.0, e) - 2.0 * std::pow(dd, e) + std::pow(std::abs(dd - 1.0), e)) / denom;
    }
    return w;
}

double h_inner_product(const GridFunction& phi, const GridFunction& psi, double H) {
    if (!(H > 0.5 && H < 1.0)) throw UnsupportedParameter("|H| inner product needs 1/2 < H < 1");
    require_same_grid(phi, psi, "h_inner_product");
    const std::size_t n = phi.n();
    const auto w = fbm_cell_kernel(n, H);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = 0.5 * (phi[i] + phi[i + 1]);
        b[i] = 0.5 * (psi[i] + psi[i + 1]);
    }
    // Sum over lags so the result is symmetric in (phi, psi) bit for bit:
    // lag 0 plus, for each d > 0, sum_i (a_i b_{i+d} + a_{i+d} b_i).
    std::vector<double> by_lag(n, 0.0), buf;
    buf.reserve(n);
    for (std::size_t d = 0; d < n; ++d) {
        buf.clear();
        for (std::size_t i = 0; i + d < n; ++i)
            buf.push_back(d == 0 ? a[i] * b[i] : a[i] * b[i + d] + a[i + d] * b[i]);
        by_lag[d] = w[d] * pairwise_sum(buf);
    }
    return H * (2.0 * H - 1.0) * pairwise_sum(by_lag);
}

}  // namespace ellipsde
