#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace ellipsde {

/// A real function on [0,1] sampled at the uniform nodes t_i = i/n, i = 0..n.
class GridFunction {
public:
    GridFunction() = default;

    /// Takes ownership of n+1 node values; throws InvalidInput if n < 2 or a value is not finite.
    explicit GridFunction(std::vector<double> values);

    /// Samples f at every node.
    template <typename F>
    static GridFunction sample(std::size_t n, F&& f) {
        std::vector<double> v(n + 1);
        for (std::size_t i = 0; i <= n; ++i) v[i] = f(node_time(i, n));
        return GridFunction(std::move(v));
    }

    static GridFunction constant(std::size_t n, double c) {
        return GridFunction(std::vector<double>(n + 1, c));
    }

    static double node_time(std::size_t i, std::size_t n) {
        return static_cast<double>(i) / static_cast<double>(n);
    }

    std::size_t n() const noexcept { return values_.empty() ? 0 : values_.size() - 1; }
    double h() const noexcept { return 1.0 / static_cast<double>(n()); }
    double t(std::size_t i) const noexcept { return node_time(i, n()); }

    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double at(std::size_t i) const { return values_.at(i); }
    std::span<const double> values() const noexcept { return values_; }

    /// Index of the node at time t; throws InvalidInput if t is not a node.
    std::size_t node_index(double t) const;

    double sup_norm() const noexcept;

    GridFunction operator+(const GridFunction& o) const;
    GridFunction operator-(const GridFunction& o) const;
    GridFunction operator*(const GridFunction& o) const;
    GridFunction operator*(double c) const;

    template <typename F>
    GridFunction map(F&& f) const {
        std::vector<double> v(values_.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(values_[i]);
        return GridFunction(std::move(v));
    }

    bool operator==(const GridFunction&) const = default;

private:
    std::vector<double> values_;
};

/// Throws InvalidInput unless both functions live on the same grid.
void require_same_grid(const GridFunction& a, const GridFunction& b, const char* what);

/// Values of a function of two grid variables, (n+1) x (n+1), row-major: (i, j) = f(i/n, j/n).
class GridSquare {
public:
    GridSquare() = default;
    GridSquare(std::size_t n, double fill = 0.0);

    template <typename F>
    static GridSquare sample(std::size_t n, F&& f) {
        GridSquare g(n);
        for (std::size_t i = 0; i <= n; ++i)
            for (std::size_t j = 0; j <= n; ++j)
                g(i, j) = f(GridFunction::node_time(i, n), GridFunction::node_time(j, n));
        return g;
    }

    std::size_t n() const noexcept { return n_; }
    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * (n_ + 1) + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * (n_ + 1) + j]; }

    GridFunction row(std::size_t i) const;
    GridFunction column(std::size_t j) const;
    void set_row(std::size_t i, const GridFunction& f);

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

struct HolderReport {
    double sup_norm = 0.0;
    double seminorm = 0.0;
    double gamma = 1.0;
    double norm = 0.0;  // sup_norm + seminorm
};

/// Discrete Hölder norm: sup |f_i| plus the max over all node pairs of |f_j - f_i| / ((j-i)/n)^gamma.
/// O(n^2). gamma must lie in (0, 1].
HolderReport holder_norm(const GridFunction& f, double gamma);

/// Seminorm part of holder_norm only.
double holder_seminorm(const GridFunction& f, double gamma);

/// Approximate seminorm over dyadic lags 1, 2, 4, ... only; O(n log n). Lower bound of holder_seminorm.
/// Meant for n > 4096 where the all-pairs scan gets slow.
HolderReport holder_norm_dyadic(const GridFunction& f, double gamma);

/// Trapezoid rule over [a, b]; a and b must be grid nodes. Exact for grid-linear f.
double quadrature(const GridFunction& f, double a, double b);

/// Summation by recursive halving; fixed order so results do not depend on the caller.
double pairwise_sum(std::span<const double> terms);

/// CSV with header "t,value" and one row per node.
void write_csv(std::ostream& os, const GridFunction& f);
GridFunction read_csv(std::istream& is);
void write_csv_file(const std::string& path, const GridFunction& f);
GridFunction read_csv_file(const std::string& path);

}  // namespace ellipsde
