#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "herglotz/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Herglotz variational toolkit"};
    app.set_version_flag("--version", herglotz::kVersion);

    std::string config_path;
    std::string output_dir;
    int jobs = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool models = false;

    app.add_option("--config", config_path, "experiment config file");
    app.add_option("--output", output_dir, "override the output directory");
    app.add_option("--jobs", jobs, "parallel workers for table builds");
    app.add_option("--seed", seed, "override the multistart seed")
        ->each([&](const std::string&) { seed_set = true; });
    app.add_flag("--list-models", models, "print the model registry and exit");

    CLI11_PARSE(app, argc, argv);

    if (models) {
        std::cout << herglotz::cli::list_models();
        return 0;
    }
    if (config_path.empty()) {
        std::cerr << "usage: herglotz --config <path> [--output <dir>] [--jobs <n>] "
                     "[--seed <k>] | --list-models\n";
        return 2;
    }

    herglotz::cli::RunOverrides overrides;
    if (!output_dir.empty()) overrides.out_dir = output_dir;
    if (jobs > 0) overrides.jobs = jobs;
    if (seed_set) overrides.seed = seed;
    if (!overrides.jobs) {
        if (const char* env = std::getenv("HERGLOTZ_JOBS")) {
            int n = std::atoi(env);
            if (n > 0) overrides.jobs = n;
        }
    }
    return herglotz::cli::run(config_path, overrides);
}
