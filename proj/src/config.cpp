#include "ellipsde/config.hpp"

#include "ellipsde/errors.hpp"

#include <cmath>
#include <fstream>
#include <istream>

namespace ellipsde {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Settings parse_settings(std::istream& is) {
    Settings out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw InvalidInput("config line " + std::to_string(lineno) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

Settings read_settings_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open config file " + path);
    return parse_settings(in);
}

Settings merge_settings(Settings base, const Settings& over) {
    for (const auto& [k, v] : over) base[k] = v;
    return base;
}

double parse_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (value.empty() || used != value.size() || !std::isfinite(v))
        throw InvalidInput("setting " + key + ": '" + value + "' is not a finite number");
    return v;
}

long long parse_integer(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (value.empty() || used != value.size())
        throw InvalidInput("setting " + key + ": '" + value + "' is not an integer");
    return v;
}

ExperimentConfig experiment_config(const Settings& s) {
    ExperimentConfig c;
    auto nonneg = [](const std::string& k, long long v) {
        if (v < 0) throw InvalidInput("setting " + k + " must be nonnegative");
        return v;
    };
    for (const auto& [k, v] : s) {
        if (k == "H") c.fbm.H = parse_double(k, v);
        else if (k == "n") c.fbm.n = static_cast<std::size_t>(nonneg(k, parse_integer(k, v)));
        else if (k == "seed") c.fbm.seed = static_cast<std::uint64_t>(nonneg(k, parse_integer(k, v)));
        else if (k == "M") c.spec.M = parse_double(k, v);
        else if (k == "gamma") c.spec.gamma = parse_double(k, v);
        else if (k == "p") c.spec.p = static_cast<int>(parse_integer(k, v));
        else if (k == "epsilon") c.spec.epsilon = parse_double(k, v);
        else if (k == "cutoff") c.spec.flavor = parse_flavor(v);
        else if (k == "sigma") c.sigma = v;
        else if (k == "kappa") c.solver.kappa = parse_double(k, v);
        else if (k == "tol") c.solver.tol = parse_double(k, v);
        else if (k == "max_iters") c.solver.max_iters = static_cast<int>(parse_integer(k, v));
        else if (k == "K_ball") c.solver.K_ball = parse_double(k, v);
        else if (k == "N") c.N = static_cast<std::size_t>(nonneg(k, parse_integer(k, v)));
        else if (k == "t_eval") c.t_eval = parse_double(k, v);
        else if (k == "a") c.a = parse_double(k, v);
        else if (k == "output_dir") c.output_dir = v;
        else if (k == "path") c.path = v;
        else if (k == "threads") c.threads = static_cast<std::size_t>(nonneg(k, parse_integer(k, v)));
        else throw InvalidInput("unknown setting '" + k + "'");
    }
    return c;
}

}  // namespace ellipsde
