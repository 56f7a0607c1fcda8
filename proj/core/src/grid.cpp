#include "mobility/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mobility {

void SolverConfig::validate() const {
    if (n_states < 2)
        throw OutOfRangeError("solver.n_states", n_states, "n_states >= 2");
    if (n_actions < 2)
        throw OutOfRangeError("solver.n_actions", n_actions, "n_actions >= 2");
    if (!(tolerance > 0.0))
        throw OutOfRangeError("solver.tolerance", tolerance, "tolerance > 0");
    if (max_iterations < 1)
        throw OutOfRangeError("solver.max_iterations",
                              static_cast<double>(max_iterations),
                              "max_iterations >= 1");
    if (!(eval_tolerance > 0.0))
        throw OutOfRangeError("solver.eval_tolerance", eval_tolerance,
                              "eval_tolerance > 0");
    if (eval_max_iterations < 1)
        throw OutOfRangeError("solver.eval_max_iterations",
                              static_cast<double>(eval_max_iterations),
                              "eval_max_iterations >= 1");
    if (max_policy_iterations < 1)
        throw OutOfRangeError("solver.max_policy_iterations",
                              static_cast<double>(max_policy_iterations),
                              "max_policy_iterations >= 1");
}

int Grid::bracket_state(double phi) const {
    const int n = n_states();
    auto it = std::upper_bound(states.begin(), states.end(), phi);
    int idx = static_cast<int>(it - states.begin()) - 1;
    return std::clamp(idx, 0, n - 2);
}

int Grid::nearest_state(double phi) const {
    const int i = bracket_state(std::clamp(phi, 0.0, 1.0));
    const double phic = std::clamp(phi, 0.0, 1.0);
    return (phic - states[i] <= states[i + 1] - phic) ? i : i + 1;
}

int Grid::nearest_action(double theta) const {
    const double t = std::clamp(theta, 0.0, sigma);
    auto it = std::upper_bound(actions.begin(), actions.end(), t);
    int i = std::clamp(static_cast<int>(it - actions.begin()) - 1, 0,
                       n_actions() - 2);
    return (t - actions[i] <= actions[i + 1] - t) ? i : i + 1;
}

Grid build_grid(const SolverConfig& config, const ModelParams& params) {
    config.validate();

    Grid grid;
    grid.sigma = params.sigma;
    grid.states.resize(config.n_states);
    grid.actions.resize(config.n_actions);
    for (int i = 0; i < config.n_states; ++i)
        grid.states[i] = static_cast<double>(i) / (config.n_states - 1);
    for (int j = 0; j < config.n_actions; ++j)
        grid.actions[j] =
            params.sigma * static_cast<double>(j) / (config.n_actions - 1);

    const double half = 0.5 * grid.action_step() + 1e-12;
    grid.window_lo.resize(config.n_states);
    grid.window_hi.resize(config.n_states);
    for (int i = 0; i < config.n_states; ++i) {
        const AdmissibleRange range = admissible_range(grid.states[i], params);
        auto lo_it = std::lower_bound(grid.actions.begin(), grid.actions.end(),
                                      range.lo - half);
        auto hi_it = std::upper_bound(grid.actions.begin(), grid.actions.end(),
                                      range.hi + half);
        int jlo = static_cast<int>(lo_it - grid.actions.begin());
        int jhi = static_cast<int>(hi_it - grid.actions.begin()) - 1;
        jlo = std::clamp(jlo, 0, config.n_actions - 1);
        jhi = std::clamp(jhi, 0, config.n_actions - 1);
        if (jhi < jlo)
            throw InfeasibleError("empty action window at state " +
                                  std::to_string(grid.states[i]));
        grid.window_lo[i] = jlo;
        grid.window_hi[i] = jhi;
    }
    return grid;
}

double interpolate_value(std::span<const double> values, const Grid& grid,
                         double phi, Interpolation mode) {
    if (phi < -1e-12 || phi > 1.0 + 1e-12)
        throw DomainError("interpolation state " + std::to_string(phi) +
                          " outside [0,1]");
    phi = std::clamp(phi, 0.0, 1.0);

    if (mode == Interpolation::nearest) return values[grid.nearest_state(phi)];

    const int i = grid.bracket_state(phi);
    const double span = grid.states[i + 1] - grid.states[i];
    const double t = (phi - grid.states[i]) / span;
    return (1.0 - t) * values[i] + t * values[i + 1];
}

} // namespace mobility
