#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "herglotz/model.hpp"

namespace herglotz::cli {

struct GridSpec {
    double lo = 0.0, hi = 0.0;
    int count = 0;

    std::vector<double> values() const;
};

/// Flat key = value experiment file.  Dotted keys, '#' comments, unknown keys
/// rejected with the offending line number.
struct ExperimentConfig {
    std::string task;  // minimize | shoot | table | invariants | compare
    std::string model_name;
    std::map<std::string, double> model_params;

    Vector x0, x1;
    double t = 0.0;
    double u0 = 0.0;
    std::optional<GridSpec> t_grid, x_grid;

    int N = 256;
    double gtol = 1e-8;
    int steps = 1024;
    bool multistart = false;
    std::uint64_t seed = 0;

    std::string out_dir = "out";
    std::vector<std::string> formats = {"csv", "json"};
    int jobs = 1;

    std::string echo;  // normalized key=value listing for the manifest
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

}  // namespace herglotz::cli
