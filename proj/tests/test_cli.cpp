#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "csv.hpp"
#include "doctest.h"
#include "run_config.hpp"

using namespace mobility;
using namespace mobility::cli;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("mobility_test_" + tag + "_" +
                std::to_string(
                    std::chrono::steady_clock::now().time_since_epoch().count()));
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig tiny_config() {
    RunConfig config = parse_config("{}");
    config.solver.n_states = 101;
    config.solver.n_actions = 101;
    config.simulate.horizon = 200;
    config.simulate.initial_states = 21;
    return config;
}

} // namespace

TEST_CASE("format_number uses '.' and the requested significant digits") {
    CHECK(format_number(0.125, 9) == "0.125");
    CHECK(format_number(1.0 / 3.0, 9) == "0.333333333");
    CHECK(format_number(0.0, 9) == "0");
    CHECK(format_number(-2.5e-7, 3) == "-2.5e-07");
}

TEST_CASE("config defaults and round trips") {
    const RunConfig config = parse_config("{}");
    CHECK(config.model.alpha == 0.15);
    CHECK(config.model.gamma == 0.9);
    CHECK(config.solver.n_states == 1001);
    CHECK(config.output.precision == 9);
    CHECK(config.sweep.axes.size() == 3);

    const RunConfig custom = parse_config(R"({
        "model": {"alpha": 0.2, "sigma": 0.5, "tau": 0.12, "gamma": 0.6},
        "solver": {"n_states": 51, "method": "policy-iteration",
                    "interpolation": "nearest"},
        "simulate": {"phi0_init": 0.7, "horizon": 10,
                      "mc": {"n_agents": 2000, "seed": 42}},
        "output": {"directory": "elsewhere", "precision": 12}
    })");
    CHECK(custom.model.alpha == 0.2);
    CHECK(custom.solver.method == Method::policy_iteration);
    CHECK(custom.solver.interpolation == Interpolation::nearest);
    CHECK(custom.simulate.mc.has_value());
    CHECK(custom.simulate.mc->seed == 42);
    CHECK(custom.output.directory == "elsewhere");
}

TEST_CASE("config rejection is total and names the field") {
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"mode": {}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"alhpa": 0.1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"model": {"gamma": 1.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"solver": {"n_states": 1}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"simulate": {"phi0_init": 1.5}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"output": {"format": "xml"}})"),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"sweep": {"axes": [{"param": "beta",
                         "min": 0.1, "max": 0.2, "count": 5}]}})"),
        ConfigError);

    try {
        parse_config(R"({"model": {"gamma": 1.0}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("gamma") != std::string::npos);
    }
}

TEST_CASE("cmd_analytic writes the report") {
    TempDir dir("analytic");
    RunConfig config = tiny_config();
    CommandOptions options{dir.path, false};
    CHECK(cmd_analytic(config, options) == kExitOk);
    const std::string report = read_file(dir.path / "analytic_report.json");
    CHECK(report.find("0.1980039") != std::string::npos);
    CHECK(report.find("tau_star") != std::string::npos);
}

TEST_CASE("cmd_solve smoke run on a tiny grid") {
    TempDir dir("solve");
    RunConfig config = tiny_config();
    config.solver.n_states = 11;
    config.solver.n_actions = 11;
    CommandOptions options{dir.path, false};

    const auto start = std::chrono::steady_clock::now();
    CHECK(cmd_solve(config, options) == kExitOk);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    CHECK(std::chrono::duration<double>(elapsed).count() < 1.0);

    const std::string policy = read_file(dir.path / "policy.csv");
    CHECK(policy.rfind("phi0,theta0,theta1,aa_extent,value\n", 0) == 0);
    CHECK(std::count(policy.begin(), policy.end(), '\n') == 12);
    CHECK(read_file(dir.path / "solve_report.json")
              .find("tipping_cross_check") != std::string::npos);
}

TEST_CASE("csv outputs are byte-identical across reruns") {
    TempDir dir_a("rerun_a");
    TempDir dir_b("rerun_b");
    RunConfig config = tiny_config();
    config.simulate.mc = McBlock{2000, 99, 5};
    CHECK(cmd_simulate(config, {dir_a.path, false}) == kExitOk);
    CHECK(cmd_simulate(config, {dir_b.path, false}) == kExitOk);
    for (const char* name :
         {"trajectory.csv", "absorbing.csv", "mc_report.json"}) {
        CHECK(read_file(dir_a.path / name) == read_file(dir_b.path / name));
    }
}

TEST_CASE("emitted csv round-trips within one unit in the last place") {
    TempDir dir("roundtrip");
    RunConfig config = tiny_config();
    CommandOptions options{dir.path, false};
    REQUIRE(cmd_solve(config, options) == kExitOk);

    std::ifstream in(dir.path / "policy.csv");
    std::string line;
    std::getline(in, line);  // header
    int row = 0;
    while (std::getline(in, line)) {
        std::stringstream cells(line);
        std::string cell;
        std::getline(cells, cell, ',');
        const double parsed = std::strtod(cell.c_str(), nullptr);
        const double original =
            static_cast<double>(row) / (config.solver.n_states - 1);
        double unit_last_place = 0.0;
        if (original != 0.0) {
            const int exponent =
                static_cast<int>(std::floor(std::log10(std::abs(original))));
            unit_last_place =
                std::pow(10.0, exponent - (config.output.precision - 1));
        }
        CHECK(std::abs(parsed - original) <= unit_last_place + 1e-300);
        ++row;
    }
    CHECK(row == config.solver.n_states);
}

TEST_CASE("json output format mirrors the csv tables") {
    TempDir dir("jsonfmt");
    RunConfig config = tiny_config();
    config.solver.n_states = 11;
    config.solver.n_actions = 11;
    config.output.format = "json";
    CHECK(cmd_solve(config, {dir.path, false}) == kExitOk);
    CHECK(std::filesystem::exists(dir.path / "policy.json"));
    CHECK_FALSE(std::filesystem::exists(dir.path / "policy.csv"));
}

TEST_CASE("cmd_simulate emits the baseline when requested") {
    TempDir dir("baseline");
    RunConfig config = tiny_config();
    config.model = validate_params(0.15, 0.4, 0.1, 0.9, 0.2, 0.0);
    config.simulate.baseline = true;
    CHECK(cmd_simulate(config, {dir.path, false}) == kExitOk);
    const std::string baseline = read_file(dir.path / "baseline.csv");
    // the drift with p_a > p_d ends with everyone disadvantaged
    std::stringstream ss(baseline);
    std::string line, last;
    while (std::getline(ss, line))
        if (!line.empty()) last = line;
    std::stringstream cells(last);
    std::string cell;
    std::getline(cells, cell, ',');
    std::getline(cells, cell, ',');
    CHECK(std::strtod(cell.c_str(), nullptr) > 0.999);
}

TEST_CASE("cmd_sweep classifies persistence consistently") {
    TempDir dir("sweep");
    RunConfig config = tiny_config();
    config.sweep.axes = {{"alpha", 0.05, 0.5, 6},
                         {"tau", 0.05, 0.5, 6},
                         {"gamma", 0.0, 0.9, 7}};
    CHECK(cmd_sweep(config, {dir.path, false}) == kExitOk);

    std::ifstream in(dir.path / "regions.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "alpha,tau,gamma,phi_star,persistent");
    int rows = 0;
    while (std::getline(in, line)) {
        std::stringstream cells(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(cells, cell, ','))
            v.push_back(std::strtod(cell.c_str(), nullptr));
        REQUIRE(v.size() == 5);
        CHECK(((v[3] == 0.0) == (v[4] == 1.0)));
        ++rows;
    }
    CHECK(rows == 6 * 6 * 7);
    CHECK(std::filesystem::exists(dir.path / "gamma_star.csv"));
    CHECK(std::filesystem::exists(dir.path / "tau_star.csv"));
    CHECK(std::filesystem::exists(dir.path / "alpha_star.csv"));
}

TEST_CASE("sweep persistence flips once along the gamma axis") {
    TempDir dir("sweepflip");
    RunConfig config = tiny_config();
    config.sweep.axes = {{"alpha", 0.15, 0.15, 2},
                         {"tau", 0.3, 0.3, 2},
                         {"gamma", 0.0, 0.95, 40}};
    CHECK(cmd_sweep(config, {dir.path, false}) == kExitOk);

    std::ifstream in(dir.path / "regions.csv");
    std::string line;
    std::getline(in, line);
    std::vector<int> flags;
    // read the first (alpha, tau) block: gamma varies fastest
    for (int k = 0; k < 40 && std::getline(in, line); ++k) {
        flags.push_back(line.back() == '1');
    }
    int flips = 0;
    for (std::size_t k = 0; k + 1 < flags.size(); ++k)
        flips += flags[k] != flags[k + 1];
    CHECK(flips == 1);
    CHECK(flags.front() == 0);
    CHECK(flags.back() == 1);
}

TEST_CASE("cmd_validate passes on defaults and fails under fault injection") {
    TempDir dir("validate");
    RunConfig config = tiny_config();
    config.solver.n_states = 201;
    config.solver.n_actions = 201;
    config.simulate.mc = McBlock{20000, 11, 10};
    CHECK(cmd_validate(config, {dir.path, false}) == kExitOk);

    TempDir dir_fault("validate_fault");
    CHECK(cmd_validate(config, {dir_fault.path, true}) ==
          kExitInvariantFailure);
    const std::string report =
        read_file(dir_fault.path / "validate_report.json");
    CHECK(report.find("bellman-residual") != std::string::npos);
    CHECK(report.find("\"fault_injected\": true") != std::string::npos);
}

TEST_CASE("non-convergence still writes files and reports exit 3") {
    TempDir dir("nonconv");
    RunConfig config = tiny_config();
    config.solver.max_iterations = 2;
    CHECK(cmd_solve(config, {dir.path, false}) == kExitNonConvergence);
    CHECK(std::filesystem::exists(dir.path / "policy.csv"));
    CHECK(read_file(dir.path / "solve_report.json")
              .find("\"converged\": false") != std::string::npos);
}
