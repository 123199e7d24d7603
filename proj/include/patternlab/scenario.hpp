#pragma once

#include "patternlab/coupling.hpp"
#include "patternlab/dynamics.hpp"
#include "patternlab/pattern.hpp"
#include "patternlab/transversal.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace patternlab {

struct TransversalConfig {
    double window_radius = 1.0;
    double boundary_slack = 0.1;
    double merge_tol = 1e-6;
};

struct SpectrumConfig {
    bool interior_only = false;
};

struct RespondConfig {
    double omega = 0.0;
    std::size_t site = 0;
    int dof = 0;
    std::complex<double> amplitude{1.0, 0.0};
};

struct SweepConfig {
    std::string parameter = "phason"; // phason | step_angle | dipole_angle
    double start = 0.0;
    double stop = 1.0;
    int count = 2; // inclusive of both endpoints
};

struct KernelConfig {
    std::string type = "dipole"; // dipole | tabulated
    double coupling_range = 0.0;
    double strength = 1.0;        // dipole only
    std::string path;             // tabulated only
    bool hermitian_closure = false;
};

struct ScenarioConfig {
    int dim = 2;
    std::uint64_t rng_seed = 0;
    int workers = 1;
    std::string output_dir = "out";
    GeneratorSpec generator = WallpaperSpec{};
    Window window;
    std::optional<SeparationSpec> separation_u;
    std::optional<SeparationSpec> separation_k;
    std::optional<SeedResonator> seed_resonator;
    std::optional<KernelConfig> kernel;
    std::optional<TransversalConfig> transversal;
    SpectrumConfig spectrum{};
    std::optional<RespondConfig> respond;
    std::optional<SweepConfig> sweep;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parses a scenario config; unknown keys are rejected.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const nlohmann::json& j);

/// Schema plus physical sanity checks; returns human-readable problems.
struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
};
ValidationReport validate_scenario(const ScenarioConfig& config);

struct RunOverrides {
    std::optional<std::string> output_dir;
    std::optional<int> workers;
    std::optional<std::uint64_t> rng_seed;
};

/// Executes one subcommand (generate | classify | transversal | spectrum |
/// respond | sweep) and writes its artifacts plus manifest.json.
/// Returns the process exit code: 0 ok, 1 config error, 2 numerical failure.
int run_scenario(const ScenarioConfig& config, const std::string& subcommand,
                 const RunOverrides& overrides = {});

std::uint64_t fnv1a64_file(const std::string& path);

} // namespace patternlab
