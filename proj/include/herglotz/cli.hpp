#pragma once

#include <map>
#include <optional>
#include <string>

#include "herglotz/config.hpp"

namespace herglotz {
inline constexpr const char* kVersion = "1.0.0";
}

namespace herglotz::cli {

struct RunOverrides {
    std::optional<std::string> out_dir;
    std::optional<int> jobs;
    std::optional<std::uint64_t> seed;
};

/// Parses the config and executes the task.  Writes manifest.json (and the
/// task's data files) under the output directory; the manifest is written
/// even when the task fails numerically.  Returns the process exit status:
/// 0 all checks pass, 1 numeric failure, 2 config error.
int run(const std::string& config_path, const RunOverrides& overrides = {});

/// Registry listing: names, parameter schemas, satisfied conditions.
std::string list_models(const ModelRegistry& registry = ModelRegistry::builtins());

struct InvariantOutcome {
    bool pass = false;
    double value = 0.0;  // worst margin / error, check-specific
};

/// Model-level invariant battery used by the `invariants` task: condition
/// checks, Fenchel-Young, double transform, analytic-vs-FD partials,
/// Gronwall trials, and u0 monotonicity.
std::map<std::string, InvariantOutcome> run_invariant_battery(const LagrangianModel& lag,
                                                              std::uint64_t seed);

}  // namespace herglotz::cli
