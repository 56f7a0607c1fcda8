#include "mobility/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "mobility/analytic.hpp"

namespace mobility {

namespace {

double reported_theta1(double phi0, double theta0, const ModelParams& params) {
    if (phi0 == 1.0)
        return std::clamp(aa_line(phi0, params), params.tau,
                          params.sigma + params.tau);
    return paired_threshold(phi0, theta0, params);
}

} // namespace

Policy greedy_policy(const Solution& solution, const Grid& grid) {
    return [&solution, &grid](double phi0) {
        return solution.policy_theta0[grid.nearest_state(phi0)];
    };
}

Trajectory rollout(double phi0_init, const Policy& policy,
                   const ModelParams& params, int horizon) {
    if (!(phi0_init >= 0.0 && phi0_init <= 1.0))
        throw DomainError("phi0_init outside [0,1]");
    if (horizon < 1) throw DomainError("horizon must be >= 1");

    Trajectory traj;
    traj.steps.reserve(horizon);
    double phi = phi0_init;
    double discount = 1.0;
    double cumulative = 0.0;
    for (int t = 0; t < horizon; ++t) {
        const double requested = policy(phi);
        const AdmissibleRange range = admissible_range(phi, params);
        const double theta0 = range.clamp(requested);
        if (std::abs(theta0 - requested) > kBoundaryTol) ++traj.clamp_events;

        const double reward = period_reward(phi, theta0, params);
        cumulative += discount * reward;
        traj.steps.push_back({t, phi, theta0,
                              reported_theta1(phi, theta0, params), reward,
                              cumulative});
        phi = transition(phi, theta0, params);
        discount *= params.gamma;
    }
    return traj;
}

Trajectory no_allocation_rollout(double phi0_init, const ModelParams& params,
                                 int horizon) {
    if (!(phi0_init >= 0.0 && phi0_init <= 1.0))
        throw DomainError("phi0_init outside [0,1]");
    if (horizon < 1) throw DomainError("horizon must be >= 1");

    Trajectory traj;
    traj.steps.reserve(horizon);
    double phi = phi0_init;
    for (int t = 0; t < horizon; ++t) {
        traj.steps.push_back(
            {t, phi, params.sigma, params.sigma + params.tau, 0.0, 0.0});
        // No successes, so the ex-post state is the current state and only
        // the background resampling acts.
        phi = resample_step(phi, params);
    }
    return traj;
}

AbsorbingReport absorbing_state(double phi0_init, const Solution& solution,
                                const Grid& grid, const ModelParams& params,
                                int horizon) {
    const Policy policy = greedy_policy(solution, grid);
    double phi = phi0_init;
    constexpr int kSettleWindow = 10;
    double moves[kSettleWindow] = {};
    for (int t = 0; t < horizon; ++t) {
        const AdmissibleRange range = admissible_range(phi, params);
        const double theta0 = range.clamp(policy(phi));
        const double next = transition(phi, theta0, params);
        moves[t % kSettleWindow] = std::abs(next - phi);
        phi = next;
    }
    bool settled = horizon >= kSettleWindow;
    for (double m : moves) settled = settled && m < 1e-9;
    return {phi, settled};
}

double discounted_return(const Trajectory& trajectory, double gamma) {
    if (trajectory.steps.empty()) throw DomainError("empty trajectory");
    double total = 0.0;
    double discount = 1.0;
    for (const TrajectoryStep& step : trajectory.steps) {
        total += discount * step.reward;
        discount *= gamma;
    }
    return total;
}

double return_tail_bound(const ModelParams& params, int horizon) {
    return params.alpha * (params.sigma + params.tau) *
           std::pow(params.gamma, horizon) / (1.0 - params.gamma);
}

} // namespace mobility
