#pragma once

#include <span>
#include <vector>

#include "mobility/model.hpp"

namespace mobility {

enum class Interpolation { linear, nearest };
enum class Method { value_iteration, policy_iteration };

/// Numerical configuration of the discretized solver. The defaults follow
/// the 1001-point equidistant discretization of states and actions.
struct SolverConfig {
    int n_states = 1001;
    int n_actions = 1001;
    double tolerance = 1e-9;       ///< sup-norm stopping threshold
    long max_iterations = 200000;
    Interpolation interpolation = Interpolation::linear;
    Method method = Method::value_iteration;
    double eval_tolerance = 1e-10; ///< policy-evaluation stopping threshold
    long eval_max_iterations = 10000;
    long max_policy_iterations = 500;

    void validate() const;
};

/// Equidistant state grid on [0,1] and action grid on [0, sigma], with the
/// per-state window of admissible action indices. An action index is
/// admissible when it lies within half an action step of the continuous
/// admissible range; windows are never empty.
struct Grid {
    std::vector<double> states;
    std::vector<double> actions;
    std::vector<int> window_lo;  ///< first admissible action index per state
    std::vector<int> window_hi;  ///< last admissible action index per state
    double sigma = 0.0;

    int n_states() const { return static_cast<int>(states.size()); }
    int n_actions() const { return static_cast<int>(actions.size()); }
    double state_step() const { return 1.0 / (states.size() - 1); }
    double action_step() const { return sigma / (actions.size() - 1); }

    /// Index of the grid state nearest to phi (ties resolve downward).
    int nearest_state(double phi) const;
    /// Index of the grid action nearest to theta (ties resolve downward).
    int nearest_action(double theta) const;
    /// Largest i with states[i] <= phi, capped at n_states() - 2.
    int bracket_state(double phi) const;
};

Grid build_grid(const SolverConfig& config, const ModelParams& params);

/// Value of the table at an off-grid state. Linear mode blends the two
/// bracketing states; nearest mode reads the closest one. Exact at grid
/// points in both modes. States beyond [0,1] by more than 1e-12 throw;
/// closer excursions clamp.
double interpolate_value(std::span<const double> values, const Grid& grid,
                         double phi, Interpolation mode);

} // namespace mobility
