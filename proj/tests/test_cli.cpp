#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PATTERNLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

fs::path config_dir() { return fs::path(PATTERNLAB_CONFIG_DIR); }

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("cli_test_out") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::size_t count_lines(const fs::path& file) {
    std::ifstream in(file);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    return lines;
}

} // namespace

TEST_CASE("bundled configs validate cleanly") {
    CHECK(run_cli("validate --config " + (config_dir() / "p4_spectrum.json").string()) == 0);
    CHECK(run_cli("validate --config " + (config_dir() / "quasirotation_sweep.json").string()) ==
          0);
}

TEST_CASE("p4 spectrum artifact has one row per matrix entry") {
    const fs::path dir = fresh_dir("p4_spectrum");
    const std::string config = (config_dir() / "p4_spectrum.json").string();
    REQUIRE(run_cli("spectrum --config " + config + " --out " + dir.string()) == 0);

    std::ifstream pin(dir / "pattern.json");
    REQUIRE(pin.good());
    nlohmann::json pattern;
    pin >> pattern;
    const std::size_t sites = pattern.at("points").size();
    REQUIRE(sites > 0);
    CHECK(count_lines(dir / "spectrum.csv") == 3 * sites + 1); // N = 3 dofs + header
    CHECK(fs::exists(dir / "manifest.json"));
}

TEST_CASE("classify and transversal artifacts") {
    const fs::path dir = fresh_dir("p4_classify");
    const std::string config = (config_dir() / "p4_spectrum.json").string();
    REQUIRE(run_cli("classify --config " + config + " --out " + dir.string()) == 0);
    std::ifstream in(dir / "classification.json");
    nlohmann::json report;
    in >> report;
    CHECK(report.at("class").get<std::string>() == "Delone");

    const fs::path tdir = fresh_dir("p4_transversal");
    REQUIRE(run_cli("transversal --config " + config + " --out " + tdir.string()) == 0);
    std::ifstream tin(tdir / "transversal_report.json");
    nlohmann::json treport;
    tin >> treport;
    CHECK(treport.at("cluster_count").get<std::size_t>() == 1);
}

TEST_CASE("malformed configs exit 1 and leave no partial outputs") {
    const fs::path dir = fresh_dir("bad");
    const fs::path bad = dir / "bad.json";
    {
        std::ofstream out(bad);
        out << "{\"dim\": 2, \"oops\": true}";
    }
    CHECK(run_cli("generate --config " + bad.string() + " --out " + dir.string()) == 1);
    CHECK(!fs::exists(dir / "pattern.json"));
    CHECK(!fs::exists(dir / "manifest.json"));

    const fs::path missing = dir / "missing.json";
    CHECK(run_cli("generate --config " + missing.string() + " --out " + dir.string()) == 1);

    // physically invalid: negative mass
    std::ifstream good_in((config_dir() / "p4_spectrum.json").string());
    nlohmann::json config;
    good_in >> config;
    config["seed_resonator"]["mass"][0][0] = -1.0;
    const fs::path invalid = dir / "invalid.json";
    {
        std::ofstream out(invalid);
        out << config.dump(2);
    }
    CHECK(run_cli("validate --config " + invalid.string()) == 1);
}

TEST_CASE("respond artifact reports the drive and residual") {
    const fs::path dir = fresh_dir("respond");
    const std::string config = (config_dir() / "p4_spectrum.json").string();
    REQUIRE(run_cli("respond --config " + config + " --out " + dir.string()) == 0);
    std::ifstream in(dir / "response.json");
    nlohmann::json response;
    in >> response;
    CHECK(response.at("omega").get<double>() == doctest::Approx(0.8));
    CHECK(response.at("residual").get<double>() <= 1e-9);
    CHECK(!response.at("xi").empty());
}
