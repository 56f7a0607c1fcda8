#pragma once

#include <functional>
#include <vector>

#include "mobility/solver.hpp"

namespace mobility {

/// Maps a state phi0 to the D-group threshold to impose there.
using Policy = std::function<double(double)>;

/// Per-generation record of a deterministic rollout.
struct TrajectoryStep {
    int t;
    double phi0;
    double theta0;
    double theta1;
    double reward;
    double discounted_cumulative;
};

struct Trajectory {
    std::vector<TrajectoryStep> steps;
    int clamp_events = 0;  ///< policy outputs clamped into the admissible range
};

/// Greedy policy of a solved table, looked up at the nearest grid state.
Policy greedy_policy(const Solution& solution, const Grid& grid);

/// Rolls the deterministic recurrence forward for `horizon` generations.
/// Policy outputs outside the admissible range are clamped (counted in
/// clamp_events). Step t records the state before acting, the thresholds,
/// the one-period reward, and the running discounted sum through t.
Trajectory rollout(double phi0_init, const Policy& policy,
                   const ModelParams& params, int horizon);

/// The no-intervention counterfactual: nobody receives the opportunity, so
/// rewards are zero and only the resampling drift moves the state. Records
/// theta0 = sigma and theta1 = sigma + tau (nobody clears them).
Trajectory no_allocation_rollout(double phi0_init, const ModelParams& params,
                                 int horizon);

struct AbsorbingReport {
    double phi_absorbing;
    bool settled;  ///< each of the last 10 steps moved less than 1e-9
};

/// State reached after `horizon` generations under the solution's greedy
/// policy.
AbsorbingReport absorbing_state(double phi0_init, const Solution& solution,
                                const Grid& grid, const ModelParams& params,
                                int horizon = 1000);

/// Discounted sum of the recorded rewards with the given discount factor.
double discounted_return(const Trajectory& trajectory, double gamma);

/// Bound on the return contributed by generations at or beyond `horizon`:
/// alpha (sigma + tau) gamma^horizon / (1 - gamma).
double return_tail_bound(const ModelParams& params, int horizon);

} // namespace mobility
