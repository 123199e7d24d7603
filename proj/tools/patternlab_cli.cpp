#include "patternlab/parallel.hpp"
#include "patternlab/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>

namespace {

int dispatch(const std::string& subcommand, const std::string& config_path,
             const patternlab::RunOverrides& overrides) {
    patternlab::ScenarioConfig config;
    try {
        config = patternlab::load_scenario(config_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    }
    return patternlab::run_scenario(config, subcommand, overrides);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"patternlab: architected-material patterns, transversals and spectra"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int workers = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;

    const std::vector<std::string> subcommands = {"generate", "classify", "transversal",
                                                  "spectrum", "respond", "sweep", "validate"};
    for (const auto& name : subcommands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "scenario config file")->required();
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--workers", workers, "worker pool width override");
        sub->add_option("--seed", seed, "rng seed override")->each([&](const std::string&) {
            seed_set = true;
        });
    }

    CLI11_PARSE(app, argc, argv);
    const std::string chosen = app.get_subcommands().front()->get_name();

    patternlab::RunOverrides overrides;
    if (!out_dir.empty()) overrides.output_dir = out_dir;
    if (workers > 0)
        overrides.workers = workers;
    else if (const int env_workers = patternlab::default_workers(); env_workers > 1)
        overrides.workers = env_workers;
    if (seed_set) overrides.rng_seed = seed;

    if (chosen == "validate") {
        patternlab::ScenarioConfig config;
        try {
            config = patternlab::load_scenario(config_path);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "config error: %s\n", e.what());
            return 1;
        }
        const patternlab::ValidationReport report = patternlab::validate_scenario(config);
        for (const auto& w : report.warnings) std::printf("warning: %s\n", w.c_str());
        for (const auto& e : report.errors) std::printf("error: %s\n", e.c_str());
        if (report.errors.empty() && report.warnings.empty()) std::printf("config ok\n");
        return report.errors.empty() ? 0 : 1;
    }

    return dispatch(chosen, config_path, overrides);
}
