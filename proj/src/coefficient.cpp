#include "ellipsde/coefficient.hpp"

#include "ellipsde/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace ellipsde {

Coefficient::Coefficient(std::string descriptor, Fn f, Fn d1, Fn d2, std::array<double, 3> sup_bounds,
                         std::optional<double> sigma0)
    : descriptor_(std::move(descriptor)),
      f_(std::move(f)),
      d1_(std::move(d1)),
      d2_(std::move(d2)),
      sup_(sup_bounds),
      sigma0_(sigma0) {}

Coefficient Coefficient::constant(double c) {
    std::optional<double> s0;
    if (c != 0.0) s0 = std::abs(c);
    std::ostringstream name;
    name.precision(17);
    name << "const:" << c;
    return Coefficient(
        name.str(), [c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; },
        {std::abs(c), 0.0, 0.0}, s0);
}

namespace {

std::vector<double> parse_numbers(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw InvalidInput("sigma descriptor: cannot parse number '" + item + "'");
        }
    }
    return out;
}

std::optional<double> nondegeneracy(double a0, double a1) {
    const double lo = std::abs(a0) - std::abs(a1);
    if (lo > 0.0) return lo;
    return std::nullopt;
}

}  // namespace

Coefficient Coefficient::parse(const std::string& descriptor) {
    const auto colon = descriptor.find(':');
    if (colon == std::string::npos) throw InvalidInput("sigma descriptor '" + descriptor + "' needs family:params");
    const std::string family = descriptor.substr(0, colon);
    const auto args = parse_numbers(descriptor.substr(colon + 1));

    if (family == "const") {
        if (args.size() != 1) throw InvalidInput("const:c takes one parameter");
        auto c = constant(args[0]);
        return Coefficient(descriptor, c.f_, c.d1_, c.d2_, c.sup_, c.sigma0_);
    }
    if (args.size() != 2) throw InvalidInput(family + ":a0,a1 takes two parameters");
    const double a0 = args[0], a1 = args[1];
    if (family == "tanh") {
        // max |2 sech^2 y tanh y| = 4 / (3 sqrt 3)
        const double d2max = std::abs(a1) * 4.0 / (3.0 * std::sqrt(3.0));
        return Coefficient(
            descriptor, [=](double y) { return a0 + a1 * std::tanh(y); },
            [=](double y) {
                const double c = std::cosh(y);
                return a1 / (c * c);
            },
            [=](double y) {
                const double c = std::cosh(y);
                return -2.0 * a1 * std::tanh(y) / (c * c);
            },
            {std::abs(a0) + std::abs(a1), std::abs(a1), d2max}, nondegeneracy(a0, a1));
    }
    if (family == "sin") {
        return Coefficient(
            descriptor, [=](double y) { return a0 + a1 * std::sin(y); },
            [=](double y) { return a1 * std::cos(y); }, [=](double y) { return -a1 * std::sin(y); },
            {std::abs(a0) + std::abs(a1), std::abs(a1), std::abs(a1)}, nondegeneracy(a0, a1));
    }
    throw InvalidInput("unknown sigma family '" + family + "' (expected const|tanh|sin)");
}

bool Coefficient::verify_bounds(std::size_t samples) const {
    const double slack = 1e-12;
    for (std::size_t i = 0; i < samples; ++i) {
        const double y = -50.0 + 100.0 * static_cast<double>(i) / static_cast<double>(samples - 1);
        if (std::abs(f_(y)) > sup_[0] + slack) return false;
        if (std::abs(d1_(y)) > sup_[1] + slack) return false;
        if (std::abs(d2_(y)) > sup_[2] + slack) return false;
        if (sigma0_ && std::abs(f_(y)) < *sigma0_ - slack) return false;
    }
    return true;
}

SmallnessReport coefficient_smallness(const Coefficient& sigma, double M) {
    const auto& b = sigma.sup_bounds();
    SmallnessReport r;
    r.implied_constant = (M + 1.0) * std::max({b[0], b[1], b[2]});
    r.below_one = r.implied_constant < 1.0;
    return r;
}

}  // namespace ellipsde
