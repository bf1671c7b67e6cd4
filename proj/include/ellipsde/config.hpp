#pragma once

#include "ellipsde/experiments.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace ellipsde {

/// key = value pairs; '#' starts a comment, blank lines are skipped.
using Settings = std::map<std::string, std::string>;

Settings parse_settings(std::istream& is);
Settings read_settings_file(const std::string& path);

/// Overlays `over` onto `base` (command-line flags over file entries).
Settings merge_settings(Settings base, const Settings& over);

/// Recognized keys: H n seed M gamma p epsilon cutoff sigma kappa tol max_iters K_ball N t_eval a
/// output_dir threads path. Unknown keys and malformed numbers throw InvalidInput.
ExperimentConfig experiment_config(const Settings& s);

double parse_double(const std::string& key, const std::string& value);
long long parse_integer(const std::string& key, const std::string& value);

}  // namespace ellipsde
