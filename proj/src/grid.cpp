#include "ellipsde/grid.hpp"

#include "ellipsde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace ellipsde {

GridFunction::GridFunction(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 3)
        throw InvalidInput("GridFunction needs n >= 2 (at least 3 node values)");
    for (double v : values_)
        if (!std::isfinite(v)) throw InvalidInput("GridFunction value is not finite");
}

std::size_t GridFunction::node_index(double t) const {
    const double scaled = t * static_cast<double>(n());
    const double r = std::round(scaled);
    if (t < 0.0 || t > 1.0 || std::abs(scaled - r) > 1e-9 * std::max(1.0, scaled))
        throw InvalidInput("time " + std::to_string(t) + " is not a grid node");
    return static_cast<std::size_t>(r);
}

double GridFunction::sup_norm() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what) {
    if (a.n() != b.n())
        throw InvalidInput(std::string(what) + ": grid mismatch (n=" + std::to_string(a.n()) +
                           " vs n=" + std::to_string(b.n()) + ")");
}

namespace {
template <typename Op>
GridFunction zip(const GridFunction& a, const GridFunction& b, Op op) {
    require_same_grid(a, b, "GridFunction arithmetic");
    std::vector<double> v(a.n() + 1);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i], b[i]);
    return GridFunction(std::move(v));
}
}  // namespace

GridFunction GridFunction::operator+(const GridFunction& o) const {
    return zip(*this, o, [](double x, double y) { return x + y; });
}
GridFunction GridFunction::operator-(const GridFunction& o) const {
    return zip(*this, o, [](double x, double y) { return x - y; });
}
GridFunction GridFunction::operator*(const GridFunction& o) const {
    return zip(*this, o, [](double x, double y) { return x * y; });
}
GridFunction GridFunction::operator*(double c) const {
    return map([c](double x) { return c * x; });
}

GridSquare::GridSquare(std::size_t n, double fill) : n_(n), data_((n + 1) * (n + 1), fill) {
    if (n < 2) throw InvalidInput("GridSquare needs n >= 2");
}

GridFunction GridSquare::row(std::size_t i) const {
    auto first = data_.begin() + static_cast<std::ptrdiff_t>(i * (n_ + 1));
    return GridFunction(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n_ + 1)));
}

GridFunction GridSquare::column(std::size_t j) const {
    std::vector<double> v(n_ + 1);
    for (std::size_t i = 0; i <= n_; ++i) v[i] = (*this)(i, j);
    return GridFunction(std::move(v));
}

void GridSquare::set_row(std::size_t i, const GridFunction& f) {
    if (f.n() != n_) throw InvalidInput("GridSquare::set_row: grid mismatch");
    std::copy(f.values().begin(), f.values().end(),
              data_.begin() + static_cast<std::ptrdiff_t>(i * (n_ + 1)));
}

namespace {
void check_gamma(double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw InvalidInput("Hölder exponent must lie in (0, 1]");
}
}  // namespace

double holder_seminorm(const GridFunction& f, double gamma) {
    check_gamma(gamma);
    const std::size_t n = f.n();
    std::vector<double> inv_len(n + 1, 0.0);
    for (std::size_t d = 1; d <= n; ++d)
        inv_len[d] = std::pow(static_cast<double>(d) / static_cast<double>(n), -gamma);
    const auto v = f.values();
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double fi = v[i];
        for (std::size_t j = i + 1; j <= n; ++j)
            best = std::max(best, std::abs(v[j] - fi) * inv_len[j - i]);
    }
    return best;
}

HolderReport holder_norm(const GridFunction& f, double gamma) {
    HolderReport r;
    r.gamma = gamma;
    r.seminorm = holder_seminorm(f, gamma);
    r.sup_norm = f.sup_norm();
    r.norm = r.sup_norm + r.seminorm;
    return r;
}

HolderReport holder_norm_dyadic(const GridFunction& f, double gamma) {
    check_gamma(gamma);
    const std::size_t n = f.n();
    const auto v = f.values();
    double best = 0.0;
    for (std::size_t d = 1; d <= n; d *= 2) {
        const double inv = std::pow(static_cast<double>(d) / static_cast<double>(n), -gamma);
        for (std::size_t i = 0; i + d <= n; ++i) best = std::max(best, std::abs(v[i + d] - v[i]) * inv);
    }
    HolderReport r;
    r.gamma = gamma;
    r.seminorm = best;
    r.sup_norm = f.sup_norm();
    r.norm = r.sup_norm + r.seminorm;
    return r;
}

double quadrature(const GridFunction& f, double a, double b) {
    if (a > b) throw InvalidInput("quadrature: need a <= b");
    const std::size_t ia = f.node_index(a);
    const std::size_t ib = f.node_index(b);
    double s = 0.0;
    for (std::size_t i = ia; i < ib; ++i) s += 0.5 * (f[i] + f[i + 1]);
    return s * f.h();
}

double pairwise_sum(std::span<const double> terms) {
    if (terms.size() <= 8) {
        double s = 0.0;
        for (double t : terms) s += t;
        return s;
    }
    const std::size_t half = terms.size() / 2;
    return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

void write_csv(std::ostream& os, const GridFunction& f) {
    os << "t,value\n";
    char buf[64];
    for (std::size_t i = 0; i <= f.n(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.t(i), f[i]);
        os << buf;
    }
}

GridFunction read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidInput("CSV: empty input");
    if (line.rfind("t,value", 0) != 0) throw InvalidInput("CSV: expected header 't,value'");
    std::vector<double> ts, vs;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InvalidInput("CSV: malformed row '" + line + "'");
        try {
            ts.push_back(std::stod(line.substr(0, comma)));
            vs.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::logic_error&) {
            throw InvalidInput("CSV: malformed row '" + line + "'");
        }
    }
    if (vs.size() < 3) throw InvalidInput("CSV: need at least 3 rows");
    const std::size_t n = vs.size() - 1;
    for (std::size_t i = 0; i <= n; ++i)
        if (std::abs(ts[i] - GridFunction::node_time(i, n)) > 1e-9)
            throw InvalidInput("CSV: t column is not the uniform grid i/n");
    return GridFunction(std::move(vs));
}

void write_csv_file(const std::string& path, const GridFunction& f) {
    std::ofstream os(path);
    if (!os) throw InvalidInput("cannot open '" + path + "' for writing");
    write_csv(os, f);
}

GridFunction read_csv_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidInput("cannot open '" + path + "'");
    return read_csv(is);
}

}  // namespace ellipsde
