#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobility/grid.hpp"
#include "mobility/model.hpp"

namespace mobility::cli {

/// A config document failed validation; the message carries the field path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct McBlock {
    std::size_t n_agents = 100000;
    std::uint64_t seed = 1;
    int generations = 20;
};

struct SimulateBlock {
    double phi0_init = 0.5;
    int horizon = 1000;
    int initial_states = 101;  ///< size of the absorbing-state initial grid
    bool baseline = false;     ///< also emit the no-allocation drift rollout
    std::optional<McBlock> mc;
};

struct SweepAxis {
    std::string param;  // "alpha", "tau" or "gamma"
    double min = 0.0;
    double max = 0.0;
    int count = 0;
};

struct SweepBlock {
    std::vector<SweepAxis> axes;  ///< defaults to 20x20x20 over (alpha, tau, gamma)
};

struct OutputConfig {
    std::string directory = "out";
    std::string format = "csv";  // csv | json
    int precision = 9;
};

struct RunConfig {
    ModelParams model = ModelParams{0.15, 0.4, 0.1, 0.9, 0.0, 0.0};
    SolverConfig solver;
    SimulateBlock simulate;
    SweepBlock sweep;
    OutputConfig output;
};

/// Parses and fully validates a JSON config file. Unknown keys anywhere are
/// hard errors; nothing is computed or written when validation fails.
RunConfig load_config(const std::filesystem::path& path);

/// Parses a config from an in-memory JSON string (same validation).
RunConfig parse_config(const std::string& text);

Interpolation parse_interpolation(const std::string& name);
Method parse_method(const std::string& name);

} // namespace mobility::cli
