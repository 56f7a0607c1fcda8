#pragma once

#include <span>
#include <vector>

#include "mobility/grid.hpp"

namespace mobility {

/// Converged value and policy tables for one discretized decision process.
struct Solution {
    std::vector<double> values;         ///< optimal value estimate per state
    std::vector<double> policy_theta0;  ///< greedy D threshold per state
    std::vector<double> policy_theta1;  ///< paired A threshold per state
    std::vector<double> aa_extent;      ///< max(0, theta1 - theta0) under the sigma convention
    std::vector<double> aa_extent_raw;  ///< theta1 - theta0 as stored
    long iterations = 0;
    double final_residual = 0.0;  ///< sup-norm Bellman residual of `values`
    bool converged = false;
    double value_error_bound = 0.0;  ///< tolerance * gamma / (1 - gamma)
};

/// One synchronous Bellman sweep from `values`:
/// new_v(phi0) = max over admissible theta0 of R + gamma * interp(V, S).
/// Greedy indices break ties toward the largest theta0.
struct BackupResult {
    std::vector<double> values;
    std::vector<int> greedy;
};
BackupResult bellman_backup(std::span<const double> values, const Grid& grid,
                            const ModelParams& params,
                            const SolverConfig& config);

Solution value_iteration(const Grid& grid, const ModelParams& params,
                         const SolverConfig& config);

Solution policy_iteration(const Grid& grid, const ModelParams& params,
                          const SolverConfig& config);

/// Dispatches on config.method.
Solution solve(const Grid& grid, const ModelParams& params,
               const SolverConfig& config);

/// Greedy policy tables and affirmative-action extents for a value table.
/// Among actions within 1e-12 of the per-state maximum the largest theta0
/// wins, so states below the tipping point report sigma.
Solution extract_solution(std::span<const double> values, const Grid& grid,
                          const ModelParams& params,
                          const SolverConfig& config);

/// sup over grid states of |V(phi0) - max_theta0 (R + gamma interp(V, S))|.
double bellman_residual(const Solution& solution, const Grid& grid,
                        const ModelParams& params, const SolverConfig& config);

/// First grid state whose greedy theta0 falls below sigma by more than half
/// an action step; returns n_states() when the policy never departs sigma.
int sigma_departure_state(const Solution& solution, const Grid& grid);

} // namespace mobility
