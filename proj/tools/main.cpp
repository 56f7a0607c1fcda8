#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "run_config.hpp"

namespace {

struct CliArgs {
    std::string config_path;
    std::string out_dir;
    std::string method;
    std::string interp;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int grid_states = 0;
    int grid_actions = 0;
    bool inject_fault = false;
};

void add_common_options(CLI::App* cmd, CliArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON run configuration")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory override");
    cmd->add_option("--seed", args.seed, "Monte Carlo seed override")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--grid-states", args.grid_states,
                    "state grid size override");
    cmd->add_option("--grid-actions", args.grid_actions,
                    "action grid size override");
    cmd->add_option("--method", args.method,
                    "value-iteration | policy-iteration");
    cmd->add_option("--interp", args.interp, "linear | nearest");
}

void apply_overrides(mobility::cli::RunConfig& config, const CliArgs& args) {
    if (!args.out_dir.empty()) config.output.directory = args.out_dir;
    if (args.grid_states > 0) config.solver.n_states = args.grid_states;
    if (args.grid_actions > 0) config.solver.n_actions = args.grid_actions;
    if (!args.method.empty())
        config.solver.method = mobility::cli::parse_method(args.method);
    if (!args.interp.empty())
        config.solver.interpolation =
            mobility::cli::parse_interpolation(args.interp);
    if (args.seed_set) {
        if (!config.simulate.mc) config.simulate.mc.emplace();
        config.simulate.mc->seed = args.seed;
    }
    try {
        config.solver.validate();
    } catch (const mobility::ModelError& e) {
        throw mobility::cli::ConfigError(std::string("solver: ") + e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    using namespace mobility::cli;

    CLI::App app{"Threshold-allocation dynamic program for intergenerational "
                 "mobility: analytic results, discretized solver, "
                 "simulators and parameter sweeps"};
    app.require_subcommand(1);

    CliArgs args;
    CLI::App* analytic =
        app.add_subcommand("analytic", "closed-form tipping point and "
                                       "regime boundaries");
    CLI::App* solve =
        app.add_subcommand("solve", "solve the discretized decision process");
    CLI::App* simulate =
        app.add_subcommand("simulate", "deterministic rollouts, absorbing "
                                       "states and the Monte Carlo oracle");
    CLI::App* sweep =
        app.add_subcommand("sweep", "persistence regions over (alpha, tau, "
                                    "gamma) with sigma = 1 - tau");
    CLI::App* validate =
        app.add_subcommand("validate", "run the cross-check suite");
    for (CLI::App* cmd : {analytic, solve, simulate, sweep, validate})
        add_common_options(cmd, args);
    validate->add_flag("--inject-fault", args.inject_fault,
                       "corrupt the value table (negative control)");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig config = load_config(args.config_path);
        apply_overrides(config, args);

        CommandOptions options;
        options.out_dir = config.output.directory;
        options.inject_fault = args.inject_fault;

        if (analytic->parsed()) return cmd_analytic(config, options);
        if (solve->parsed()) return cmd_solve(config, options);
        if (simulate->parsed()) return cmd_simulate(config, options);
        if (sweep->parsed()) return cmd_sweep(config, options);
        if (validate->parsed()) return cmd_validate(config, options);
        return kExitConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const mobility::ModelError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfigError;
    }
}
