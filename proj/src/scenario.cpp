#include "patternlab/scenario.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace patternlab {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "0.1.0";
constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("unknown key '" + key + "' in " + context);
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class Manifest {
  public:
    explicit Manifest(nlohmann::json config_echo) : config_(std::move(config_echo)) {}

    void record(const std::string& stage, double seconds) { timings_[stage] = seconds; }

    void add_output(const fs::path& file) { outputs_.push_back(file); }

    void write(const fs::path& dir) const {
        nlohmann::json j;
        j["version"] = kVersion;
        j["config"] = config_;
        j["timings"] = timings_;
        nlohmann::json outs = nlohmann::json::array();
        for (const auto& f : outputs_) {
            char hex[32];
            std::snprintf(hex, sizeof(hex), "%016llx",
                          static_cast<unsigned long long>(fnv1a64_file(f.string())));
            outs.push_back({{"file", f.filename().string()}, {"fnv1a64", hex}});
        }
        j["outputs"] = outs;
        std::ofstream out(dir / "manifest.json");
        out << j.dump(2) << "\n";
    }

  private:
    nlohmann::json config_;
    std::map<std::string, double> timings_;
    std::vector<fs::path> outputs_;
};

class StageTimer {
  public:
    StageTimer(Manifest& m, std::string stage)
        : manifest_(m), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        manifest_.record(stage_, std::chrono::duration<double>(elapsed).count());
    }

  private:
    Manifest& manifest_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

TransversalConfig parse_transversal(const nlohmann::json& j) {
    check_keys(j, {"window_radius", "boundary_slack", "merge_tol"}, "transversal");
    TransversalConfig t;
    t.window_radius = j.at("window_radius").get<double>();
    if (j.contains("boundary_slack")) t.boundary_slack = j.at("boundary_slack").get<double>();
    if (j.contains("merge_tol")) t.merge_tol = j.at("merge_tol").get<double>();
    return t;
}

KernelConfig parse_kernel(const nlohmann::json& j) {
    check_keys(j, {"type", "coupling_range", "strength", "path", "hermitian_closure"}, "kernel");
    KernelConfig k;
    k.type = j.at("type").get<std::string>();
    if (j.contains("coupling_range")) k.coupling_range = j.at("coupling_range").get<double>();
    if (j.contains("strength")) k.strength = j.at("strength").get<double>();
    if (j.contains("path")) k.path = j.at("path").get<std::string>();
    if (j.contains("hermitian_closure")) k.hermitian_closure = j.at("hermitian_closure").get<bool>();
    return k;
}

RespondConfig parse_respond(const nlohmann::json& j) {
    check_keys(j, {"omega", "site", "dof", "amplitude"}, "respond");
    RespondConfig r;
    r.omega = j.at("omega").get<double>();
    if (j.contains("site")) r.site = j.at("site").get<std::size_t>();
    if (j.contains("dof")) r.dof = j.at("dof").get<int>();
    if (j.contains("amplitude"))
        r.amplitude = {j.at("amplitude").at(0).get<double>(),
                       j.at("amplitude").at(1).get<double>()};
    return r;
}

SweepConfig parse_sweep(const nlohmann::json& j) {
    check_keys(j, {"parameter", "start", "stop", "count"}, "sweep");
    SweepConfig s;
    s.parameter = j.at("parameter").get<std::string>();
    s.start = j.at("start").get<double>();
    s.stop = j.at("stop").get<double>();
    s.count = j.at("count").get<int>();
    return s;
}

std::vector<double> sweep_grid(const SweepConfig& s) {
    std::vector<double> values;
    values.reserve(s.count);
    if (s.count == 1) {
        values.push_back(s.start);
        return values;
    }
    for (int i = 0; i < s.count; ++i)
        values.push_back(s.start + (s.stop - s.start) * double(i) / double(s.count - 1));
    return values;
}

DynamicalMatrix build_dynamical(const ScenarioConfig& config, const Pattern& pattern,
                                const SeedResonator& seed) {
    const auto& kc = *config.kernel;
    if (kc.type == "dipole") {
        const DipolePotential pot(seed, kc.coupling_range, kc.strength);
        EquilibriumOptions opts;
        opts.workers = config.workers;
        return assemble_from_couplings(coupling_matrices(pattern, seed, pot, opts), seed);
    }
    TabulatedKernel tk;
    std::ifstream in(kc.path);
    if (!in) throw ConfigError("cannot open tabulated kernel file: " + kc.path);
    nlohmann::json j;
    in >> j;
    from_json(j, tk);
    if (kc.hermitian_closure) tk.close_hermitian();
    return assemble(tk.kernel(), pattern);
}

SeedResonator rotate_seed_moments(const SeedResonator& seed, double angle) {
    SeedResonator out = seed;
    const Eigen::Matrix3d rz =
        Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    for (auto& d : out.dipoles) d.moment = rz * d.moment;
    return out;
}

void write_pattern(const fs::path& dir, const Pattern& p, Manifest& manifest) {
    nlohmann::json j = p;
    std::ofstream out(dir / "pattern.json");
    out << j.dump(2) << "\n";
    manifest.add_output(dir / "pattern.json");
}

void write_spectrum_csv(const fs::path& file, const Eigen::VectorXd& eigenvalues) {
    std::ofstream out(file);
    out << "index,eigenvalue\n";
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        out << i << "," << format_double(eigenvalues(i)) << "\n";
}

} // namespace

namespace {

void check_generator_keys(const nlohmann::json& j) {
    const std::string type = j.contains("type") ? j.at("type").get<std::string>() : "";
    if (type == "wallpaper")
        check_keys(j, {"type", "group", "a1", "a2", "seed_offset"}, "generator");
    else if (type == "quasirotation")
        check_keys(j, {"type", "translation", "angle", "max_steps"}, "generator");
    else if (type == "disordered")
        check_keys(j, {"type", "base", "epsilon_t", "epsilon_angle", "rng_seed"}, "generator");
    else if (type == "explicit")
        check_keys(j, {"type", "points"}, "generator");
}

} // namespace

ScenarioConfig parse_scenario(const nlohmann::json& j) {
    check_keys(j,
               {"dim", "rng_seed", "workers", "output_dir", "generator", "window", "separation",
                "seed_resonator", "kernel", "transversal", "spectrum", "respond", "sweep"},
               "scenario");
    ScenarioConfig c;
    if (j.contains("dim")) c.dim = j.at("dim").get<int>();
    if (j.contains("rng_seed")) c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    check_generator_keys(j.at("generator"));
    c.generator = j.at("generator").get<GeneratorSpec>();
    check_keys(j.at("window"), {"radius_translation", "radius_rotation", "center"}, "window");
    if (j.contains("seed_resonator"))
        check_keys(j.at("seed_resonator"), {"dim", "mass", "stiffness", "dipoles", "frozen"},
                   "seed_resonator");
    c.window = j.at("window").get<Window>();
    if (c.window.center.dim() != c.dim && !j.at("window").contains("center"))
        c.window.center = Isometry::identity(c.dim);
    if (j.contains("separation")) {
        check_keys(j.at("separation"), {"u", "k"}, "separation");
        if (j.at("separation").contains("u"))
            c.separation_u = j.at("separation").at("u").get<SeparationSpec>();
        if (j.at("separation").contains("k"))
            c.separation_k = j.at("separation").at("k").get<SeparationSpec>();
    }
    if (j.contains("seed_resonator")) c.seed_resonator = j.at("seed_resonator").get<SeedResonator>();
    if (j.contains("kernel")) c.kernel = parse_kernel(j.at("kernel"));
    if (j.contains("transversal")) c.transversal = parse_transversal(j.at("transversal"));
    if (j.contains("spectrum")) {
        check_keys(j.at("spectrum"), {"interior_only"}, "spectrum");
        if (j.at("spectrum").contains("interior_only"))
            c.spectrum.interior_only = j.at("spectrum").at("interior_only").get<bool>();
    }
    if (j.contains("respond")) c.respond = parse_respond(j.at("respond"));
    if (j.contains("sweep")) c.sweep = parse_sweep(j.at("sweep"));
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid json: ") + e.what());
    }
    try {
        return parse_scenario(j);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config schema error: ") + e.what());
    }
}

ValidationReport validate_scenario(const ScenarioConfig& config) {
    ValidationReport report;
    if (config.dim != 2 && config.dim != 3) report.errors.push_back("dim must be 2 or 3");
    if (config.window.radius_translation <= 0.0 || config.window.radius_rotation <= 0.0)
        report.errors.push_back("window radii must be positive");
    if (config.workers < 1) report.errors.push_back("workers must be >= 1");
    if (config.seed_resonator) {
        try {
            config.seed_resonator->validate();
        } catch (const std::exception& e) {
            report.errors.push_back(e.what());
        }
    }
    if (config.kernel) {
        if (config.kernel->type != "dipole" && config.kernel->type != "tabulated")
            report.errors.push_back("kernel type must be dipole or tabulated");
        if (config.kernel->type == "dipole") {
            if (!config.seed_resonator)
                report.errors.push_back("dipole kernel needs a seed_resonator block");
            else if (config.seed_resonator->dipoles.empty())
                report.errors.push_back("dipole kernel needs at least one dipole");
            if (config.kernel->coupling_range <= 0.0)
                report.errors.push_back("dipole kernel needs a positive coupling_range");
        }
        if (config.kernel->type == "tabulated" && config.kernel->path.empty())
            report.errors.push_back("tabulated kernel needs a file path");
        if (config.kernel->coupling_range >= config.window.radius_translation)
            report.warnings.push_back(
                "coupling range reaches the window boundary; interior will be empty");
    }
    if (config.transversal &&
        (config.transversal->boundary_slack <= 0.0 ||
         config.transversal->boundary_slack >= config.transversal->window_radius))
        report.errors.push_back("transversal boundary_slack must be in (0, window_radius)");
    if (config.sweep) {
        if (config.sweep->count < 1) report.errors.push_back("sweep count must be >= 1");
        if (config.sweep->parameter != "phason" && config.sweep->parameter != "step_angle" &&
            config.sweep->parameter != "dipole_angle")
            report.errors.push_back("sweep parameter must be phason, step_angle or dipole_angle");
        if (config.sweep->parameter == "step_angle" &&
            !std::holds_alternative<QuasiRotationSpec>(config.generator))
            report.errors.push_back("step_angle sweeps need a quasirotation generator");
    }
    return report;
}

int run_scenario(const ScenarioConfig& base_config, const std::string& subcommand,
                 const RunOverrides& overrides) {
    ScenarioConfig config = base_config;
    if (overrides.output_dir) config.output_dir = *overrides.output_dir;
    if (overrides.workers) config.workers = *overrides.workers;
    if (overrides.rng_seed) {
        config.rng_seed = *overrides.rng_seed;
        if (std::holds_alternative<DisorderedSpec>(config.generator))
            std::get<DisorderedSpec>(config.generator).rng_seed = config.rng_seed;
    }

    ValidationReport report = validate_scenario(config);
    // Subcommand prerequisites, checked before anything is written so a bad
    // config leaves no partial outputs.
    if (subcommand == "classify" && (!config.separation_u || !config.separation_k))
        report.errors.push_back("classify needs separation.u and separation.k");
    if (subcommand == "transversal" && !config.transversal)
        report.errors.push_back("transversal block missing");
    if (subcommand == "spectrum" || subcommand == "respond" || subcommand == "sweep") {
        if (!config.kernel) report.errors.push_back(subcommand + " needs a kernel block");
        if (subcommand == "respond" && !config.respond)
            report.errors.push_back("respond block missing");
        if (subcommand == "respond" && !config.seed_resonator)
            report.errors.push_back("respond needs a seed_resonator block for the mass matrix");
        if (subcommand == "sweep" && !config.sweep) report.errors.push_back("sweep block missing");
        if (config.sweep && config.sweep->parameter == "dipole_angle" && !config.seed_resonator)
            report.errors.push_back("dipole_angle sweeps need a seed_resonator block");
    }
    if (!report.errors.empty()) {
        for (const auto& e : report.errors) std::fprintf(stderr, "config error: %s\n", e.c_str());
        return 1;
    }

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);
    Manifest manifest(nlohmann::json{{"scenario", subcommand},
                                     {"rng_seed", config.rng_seed},
                                     {"workers", config.workers},
                                     {"generator", config.generator},
                                     {"window", config.window}});

    try {
        Pattern pattern;
        {
            StageTimer timer(manifest, "generate");
            pattern = generate(config.generator, config.window);
        }
        write_pattern(dir, pattern, manifest);

        if (subcommand == "generate") {
            manifest.write(dir);
            return 0;
        }

        if (subcommand == "classify") {
            nlohmann::json j;
            {
                StageTimer timer(manifest, "classify");
                const SeparationResult sep = is_separated(pattern, *config.separation_u);
                const bool dense = is_relatively_dense(pattern, *config.separation_k);
                j = nlohmann::json{{"separated", sep.separated},
                                   {"relatively_dense", dense},
                                   {"class", to_string(classify(pattern, *config.separation_u,
                                                                *config.separation_k))}};
                if (sep.witness) j["witness"] = {sep.witness->first, sep.witness->second};
                if (const auto r = largest_separating_ball_radius(pattern))
                    j["largest_ball_radius"] = *r;
                if (const auto r = largest_separating_group_ball_radius(pattern))
                    j["largest_group_ball_radius"] = *r;
            }
            std::ofstream out(dir / "classification.json");
            out << j.dump(2) << "\n";
            manifest.add_output(dir / "classification.json");
            manifest.write(dir);
            return 0;
        }

        if (subcommand == "transversal") {
            TransversalEstimate estimate;
            {
                StageTimer timer(manifest, "transversal");
                WindowMetricParams params;
                params.window_radius = config.transversal->window_radius;
                params.boundary_slack = config.transversal->boundary_slack;
                estimate = estimate_transversal(pattern, params,
                                                config.transversal->merge_tol, config.workers);
            }

            std::ofstream csv(dir / "pairwise_distances.csv");
            for (Eigen::Index i = 0; i < estimate.pairwise_distances.rows(); ++i) {
                for (Eigen::Index j = 0; j < estimate.pairwise_distances.cols(); ++j)
                    csv << (j ? "," : "") << format_double(estimate.pairwise_distances(i, j));
                csv << "\n";
            }
            manifest.add_output(dir / "pairwise_distances.csv");

            std::vector<std::size_t> sizes(estimate.cluster_count, 0);
            for (const auto c : estimate.cluster_assignment) sizes[c]++;
            nlohmann::json j{{"cluster_count", estimate.cluster_count},
                             {"sizes", sizes},
                             {"pairwise_distances_csv", "pairwise_distances.csv"}};
            std::ofstream out(dir / "transversal_report.json");
            out << j.dump(2) << "\n";
            manifest.add_output(dir / "transversal_report.json");
            manifest.write(dir);
            return 0;
        }

        const SeedResonator seed =
            config.seed_resonator ? *config.seed_resonator : SeedResonator{};

        if (subcommand == "spectrum") {
            SpectrumResult s;
            {
                StageTimer timer(manifest, "spectrum");
                const DynamicalMatrix d = build_dynamical(config, pattern, seed);
                s = config.spectrum.interior_only ? interior_spectrum(d) : spectrum(d, false);
            }
            write_spectrum_csv(dir / "spectrum.csv", s.eigenvalues);
            manifest.add_output(dir / "spectrum.csv");
            manifest.write(dir);
            return 0;
        }

        if (subcommand == "respond") {
            ResponseResult r;
            {
                StageTimer timer(manifest, "respond");
                const DynamicalMatrix d = build_dynamical(config, pattern, seed);
                Eigen::VectorXcd drive = Eigen::VectorXcd::Zero(d.rows());
                const Eigen::Index slot = d.index_of(config.respond->site, config.respond->dof);
                if (slot >= d.rows()) throw ConfigError("respond drive site/dof out of range");
                drive(slot) = config.respond->amplitude;
                r = respond(d, seed, drive, config.respond->omega);
            }
            nlohmann::json xi = nlohmann::json::array();
            for (Eigen::Index i = 0; i < r.xi.size(); ++i)
                xi.push_back({r.xi(i).real(), r.xi(i).imag()});
            nlohmann::json j{
                {"omega", config.respond->omega}, {"xi", xi}, {"residual", r.residual}};
            std::ofstream out(dir / "response.json");
            out << j.dump(2) << "\n";
            manifest.add_output(dir / "response.json");
            manifest.write(dir);
            return 0;
        }

        if (subcommand == "sweep") {
            SweepResult result;
            {
                StageTimer timer(manifest, "sweep");
                SweepSpec spec;
                spec.parameter_name = config.sweep->parameter;
                spec.values = sweep_grid(*config.sweep);
                spec.workers = config.workers;
                // Grid points are the parallel unit; keep the per-point
                // pipeline single-threaded to avoid nested pools.
                ScenarioConfig snapshot = config;
                snapshot.workers = 1;
                const Pattern base_pattern = pattern;
                const SeedResonator base_seed = seed;
                if (config.sweep->parameter == "phason") {
                    spec.build = [snapshot, base_pattern, base_seed](double phi) {
                        const Isometry g = Isometry::rotation2d(-phi);
                        return build_dynamical(snapshot, translate_pattern(g, base_pattern),
                                               base_seed);
                    };
                } else if (config.sweep->parameter == "step_angle") {
                    spec.build = [snapshot, base_seed](double theta) {
                        GeneratorSpec gen = snapshot.generator;
                        std::get<QuasiRotationSpec>(gen).angle = theta;
                        return build_dynamical(snapshot, generate(gen, snapshot.window),
                                               base_seed);
                    };
                } else { // dipole_angle
                    spec.build = [snapshot, base_pattern, base_seed](double angle) {
                        return build_dynamical(snapshot, base_pattern,
                                               rotate_seed_moments(base_seed, angle));
                    };
                }
                result = sweep(spec);
            }
            std::ofstream csv(dir / "sweep.csv");
            csv << "param,index,eigenvalue\n";
            for (const auto& row : result.rows)
                csv << format_double(row.parameter) << "," << row.index << ","
                    << format_double(row.eigenvalue) << "\n";
            manifest.add_output(dir / "sweep.csv");
            if (!result.failures.empty()) {
                nlohmann::json j = nlohmann::json::array();
                for (const auto& [param, message] : result.failures)
                    j.push_back({{"param", param}, {"error", message}});
                std::ofstream out(dir / "sweep_failures.json");
                out << j.dump(2) << "\n";
                manifest.add_output(dir / "sweep_failures.json");
            }
            manifest.write(dir);
            return 0;
        }

        throw ConfigError("unknown subcommand: " + subcommand);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    }
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::uint64_t hash = 1469598103934665603ull;
    char c;
    while (in.get(c)) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 1099511628211ull;
    }
    return hash;
}

} // namespace patternlab
