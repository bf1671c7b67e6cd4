#pragma once

#include "ellipsde/experiments.hpp"
#include "ellipsde/fbm.hpp"
#include "ellipsde/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace testing {

using ellipsde::GridFunction;

inline GridFunction identity(std::size_t n) {
    return GridFunction::sample(n, [](double t) { return t; });
}

/// Twenty paths: polynomials, trigonometric, Weierstrass-type and sampled fBm.
inline std::vector<std::string> corpus_descriptors() {
    std::vector<std::string> d = {"linear:1",        "linear:-2.5",      "sin:1:1",          "sin:0.7:2",
                                  "sin:0.3:5",       "sin:1.5:3",        "weierstrass:0.8",  "weierstrass:0.9:0.5",
                                  "weierstrass:0.7:0.3"};
    for (int k = 1; k <= 8; ++k) d.push_back("fbm:0.75:" + std::to_string(k));
    for (int k = 1; k <= 3; ++k) d.push_back("fbm:0.6:" + std::to_string(k));
    return d;
}

inline std::vector<GridFunction> corpus(std::size_t n) {
    std::vector<GridFunction> out;
    for (const auto& d : corpus_descriptors()) out.push_back(ellipsde::make_path(d, n));
    out.push_back(GridFunction::sample(n, [](double t) { return t * t * t - t; }));
    return out;
}

}  // namespace testing
