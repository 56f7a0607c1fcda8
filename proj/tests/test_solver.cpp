#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "mobility/analytic.hpp"
#include "mobility/solver.hpp"

using namespace mobility;

namespace {

const ModelParams kDefault = validate_params(0.15, 0.4, 0.1, 0.9, 0.0, 0.0);

SolverConfig small_config(int n_states = 201, int n_actions = 201) {
    SolverConfig config;
    config.n_states = n_states;
    config.n_actions = n_actions;
    return config;
}

} // namespace

TEST_CASE("build_grid spacing and endpoints") {
    const Grid grid = build_grid(small_config(1001, 1001), kDefault);
    CHECK(grid.states.front() == 0.0);
    CHECK(grid.states.back() == 1.0);
    CHECK(grid.actions.front() == 0.0);
    CHECK(grid.actions.back() == kDefault.sigma);
    CHECK(grid.state_step() == doctest::Approx(0.001));
    CHECK(grid.action_step() == doctest::Approx(0.0004));
}

TEST_CASE("build_grid admissible windows") {
    const Grid grid = build_grid(small_config(1001, 1001), kDefault);

    // phi0 = 1: single action, the grid point nearest sigma (1 - alpha)
    const int last = grid.n_states() - 1;
    CHECK(grid.window_lo[last] == grid.window_hi[last]);
    CHECK(grid.actions[grid.window_lo[last]] == doctest::Approx(0.34));

    // phi0 = 0: the full action range
    CHECK(grid.window_lo[0] == 0);
    CHECK(grid.window_hi[0] == grid.n_actions() - 1);

    // windows track the continuous range within half an action step
    const double half = 0.5 * grid.action_step() + 1e-9;
    for (int i = 0; i < grid.n_states(); i += 37) {
        const AdmissibleRange range =
            admissible_range(grid.states[i], kDefault);
        CHECK(grid.window_lo[i] <= grid.window_hi[i]);
        CHECK(grid.actions[grid.window_lo[i]] >= range.lo - half);
        CHECK(grid.actions[grid.window_hi[i]] <= range.hi + half);
        if (grid.window_lo[i] > 0)
            CHECK(grid.actions[grid.window_lo[i] - 1] < range.lo - 1e-15);
        if (grid.window_hi[i] + 1 < grid.n_actions())
            CHECK(grid.actions[grid.window_hi[i] + 1] > range.hi + 1e-15);
    }

    CHECK_THROWS_AS(build_grid(SolverConfig{.n_states = 1}, kDefault),
                    OutOfRangeError);
}

TEST_CASE("interpolate_value") {
    const Grid grid = build_grid(small_config(1001, 11), kDefault);
    std::vector<double> values(grid.n_states());
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : values) v = unit(rng);

    // exact at grid points in both modes
    for (int i = 0; i < grid.n_states(); i += 97) {
        CHECK(interpolate_value(values, grid, grid.states[i],
                                Interpolation::linear) == values[i]);
        CHECK(interpolate_value(values, grid, grid.states[i],
                                Interpolation::nearest) == values[i]);
    }

    // midpoint averages the bracketing states in linear mode
    const double mid = 0.5 * (grid.states[10] + grid.states[11]);
    CHECK(interpolate_value(values, grid, mid, Interpolation::linear) ==
          doctest::Approx(0.5 * (values[10] + values[11])));

    // nearest mode rounds 0.30049 down to the 0.300 state
    CHECK(interpolate_value(values, grid, 0.30049, Interpolation::nearest) ==
          values[300]);

    CHECK_THROWS_AS(
        interpolate_value(values, grid, 1.5, Interpolation::linear),
        DomainError);
}

TEST_CASE("bellman_backup from zero values is the myopic maximum") {
    const SolverConfig config = small_config(1001, 1001);
    const Grid grid = build_grid(config, kDefault);
    const std::vector<double> zeros(grid.n_states(), 0.0);
    const BackupResult result = bellman_backup(zeros, grid, kDefault, config);

    // the myopic optimum at phi0 = 0.5 sits on the equal-threshold line
    CHECK(result.values[500] == doctest::Approx(0.066125).epsilon(1e-12));
    CHECK(grid.actions[result.greedy[500]] == doctest::Approx(0.39));

    for (int i = 0; i < grid.n_states(); i += 119) {
        const AdmissibleRange range =
            admissible_range(grid.states[i], kDefault);
        double best = 0.0;
        for (int j = grid.window_lo[i]; j <= grid.window_hi[i]; ++j)
            best = std::max(best,
                            period_reward(grid.states[i],
                                          range.clamp(grid.actions[j]),
                                          kDefault));
        CHECK(result.values[i] == doctest::Approx(best).epsilon(1e-14));
    }
}

TEST_CASE("bellman backup is a gamma-contraction in the sup norm") {
    const SolverConfig config = small_config();
    const Grid grid = build_grid(config, kDefault);
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v1(grid.n_states()), v2(grid.n_states());
        for (int i = 0; i < grid.n_states(); ++i) {
            v1[i] = unit(rng);
            v2[i] = unit(rng);
        }
        const auto t1 = bellman_backup(v1, grid, kDefault, config);
        const auto t2 = bellman_backup(v2, grid, kDefault, config);
        double dv = 0.0, dt = 0.0;
        for (int i = 0; i < grid.n_states(); ++i) {
            dv = std::max(dv, std::abs(v1[i] - v2[i]));
            dt = std::max(dt, std::abs(t1.values[i] - t2.values[i]));
        }
        CHECK(dt <= kDefault.gamma * dv + 1e-12);
    }
}

TEST_CASE("value_iteration reproduces the closed-form sigma region") {
    const SolverConfig config = small_config(501, 501);
    const Grid grid = build_grid(config, kDefault);
    const Solution sol = value_iteration(grid, kDefault, config);

    CHECK(sol.converged);
    CHECK(sol.final_residual <= 1e-7);
    CHECK(sol.values[0] == doctest::Approx(0.705).epsilon(2e-3 / 0.705));

    const double star = tipping_point(kDefault).phi_star;
    const double step = grid.state_step();
    for (int i = 0; i < grid.n_states(); ++i) {
        if (grid.states[i] >= star - 2.0 * step) break;
        CHECK(sol.policy_theta0[i] == kDefault.sigma);
        CHECK(std::abs(sol.values[i] -
                       sigma_region_value(grid.states[i], kDefault)) <= 5e-3);
    }
}

TEST_CASE("solution invariants: monotone, concave, weak AA") {
    const SolverConfig config = small_config(501, 501);
    const Grid grid = build_grid(config, kDefault);
    const Solution sol = value_iteration(grid, kDefault, config);
    const int n = grid.n_states();
    const double h = grid.action_step();

    for (int i = 0; i + 1 < n; ++i)
        CHECK(sol.values[i] >= sol.values[i + 1] - 1e-9);
    for (int i = 1; i + 1 < n; ++i)
        CHECK(sol.values[i + 1] - 2.0 * sol.values[i] + sol.values[i - 1] <=
              1e-7);
    for (int i = 0; i + 1 < n; ++i)
        CHECK(sol.policy_theta0[i + 1] <= sol.policy_theta0[i] + h + 1e-12);
    for (int i = 0; i + 1 < n; ++i)
        CHECK(sol.aa_extent[i + 1] >= sol.aa_extent[i] - h - 1e-12);
    for (int i = 0; i < n; ++i)
        CHECK(sol.policy_theta0[i] <= sol.policy_theta1[i] + h + 1e-12);

    // values bounded by the best sustained reward
    const double bound =
        kDefault.alpha * (kDefault.sigma + kDefault.tau) /
        (1.0 - kDefault.gamma);
    for (int i = 0; i < n; ++i) {
        CHECK(sol.values[i] >= 0.0);
        CHECK(sol.values[i] <= bound + 1e-9);
    }
}

TEST_CASE("affirmative action starts at the tipping point") {
    const SolverConfig config = small_config(501, 501);
    const Grid grid = build_grid(config, kDefault);
    const Solution sol = value_iteration(grid, kDefault, config);
    const double star = tipping_point(kDefault).phi_star;
    const double step = grid.state_step();

    const int depart = sigma_departure_state(sol, grid);
    CHECK(std::abs(grid.states[depart] - star) <= 2.0 * step);

    for (int i = 0; i < grid.n_states(); ++i) {
        const double phi = grid.states[i];
        if (phi <= star + 2.0 * step) {
            if (phi < star - 2.0 * step) CHECK(sol.aa_extent[i] == 0.0);
            continue;
        }
        // beyond the tipping point the policy is below the AA line and the
        // paired threshold strictly exceeds it
        CHECK(sol.policy_theta0[i] < aa_line(phi, kDefault));
        CHECK(sol.aa_extent[i] > 0.0);
    }
}

TEST_CASE("myopic planner clamps the equal-threshold line into the window") {
    const ModelParams myopic = validate_params(0.15, 0.4, 0.1, 0.0, 0, 0);
    const SolverConfig config = small_config(401, 401);
    const Grid grid = build_grid(config, myopic);
    const Solution sol = value_iteration(grid, myopic, config);
    for (int i = 0; i < grid.n_states(); ++i) {
        const double target =
            std::clamp(aa_line(grid.states[i], myopic),
                       grid.actions[grid.window_lo[i]],
                       grid.actions[grid.window_hi[i]]);
        CHECK(std::abs(sol.policy_theta0[i] - target) <=
              0.5 * grid.action_step() + 1e-12);
    }
}

TEST_CASE("policy_iteration agrees with value_iteration") {
    SolverConfig config = small_config(201, 201);
    const Grid grid = build_grid(config, kDefault);
    const Solution vi = value_iteration(grid, kDefault, config);

    config.method = Method::policy_iteration;
    const Solution pi = policy_iteration(grid, kDefault, config);
    CHECK(pi.converged);
    CHECK(pi.final_residual <= 1e-7);
    for (int i = 0; i < grid.n_states(); ++i)
        CHECK(std::abs(pi.values[i] - vi.values[i]) <= 10.0 * config.tolerance);

    MESSAGE("policy iteration outer iterations: ", pi.iterations,
            ", value iteration sweeps: ", vi.iterations);
}

TEST_CASE("policy iteration converges with p_a > p_d") {
    const ModelParams drift = validate_params(0.15, 0.4, 0.1, 0.9, 0.05, 0.0);
    SolverConfig config = small_config(201, 201);
    config.method = Method::policy_iteration;
    const Grid grid = build_grid(config, drift);
    const Solution sol = policy_iteration(grid, drift, config);
    CHECK(sol.converged);
    CHECK(sol.final_residual <= 1e-7);
}

TEST_CASE("nearest-neighbor interpolation mode also converges") {
    SolverConfig config = small_config(201, 201);
    config.interpolation = Interpolation::nearest;
    const Grid grid = build_grid(config, kDefault);
    const Solution sol = value_iteration(grid, kDefault, config);
    CHECK(sol.converged);
    CHECK(sol.values[0] == doctest::Approx(0.705).epsilon(5e-3));
}

TEST_CASE("phi0 = 1 state reports the single admissible action") {
    const SolverConfig config = small_config(501, 501);
    const Grid grid = build_grid(config, kDefault);
    const Solution sol = value_iteration(grid, kDefault, config);
    const int last = grid.n_states() - 1;
    CHECK(sol.policy_theta0[last] ==
          grid.actions[grid.nearest_action(0.34)]);
}

TEST_CASE("bellman_residual") {
    const SolverConfig config = small_config(201, 201);
    const Grid grid = build_grid(config, kDefault);
    Solution sol = value_iteration(grid, kDefault, config);
    REQUIRE(sol.converged);
    CHECK(bellman_residual(sol, grid, kDefault, config) <= 1e-7);

    // unconverged zero table: the residual is the maximal myopic reward
    Solution zero = sol;
    std::fill(zero.values.begin(), zero.values.end(), 0.0);
    const BackupResult myopic =
        bellman_backup(zero.values, grid, kDefault, config);
    const double expected =
        *std::max_element(myopic.values.begin(), myopic.values.end());
    CHECK(bellman_residual(zero, grid, kDefault, config) ==
          doctest::Approx(expected).epsilon(1e-12));

    // adding a constant c shifts the residual to |c| (1 - gamma)
    const double c = 0.25;
    Solution shifted = sol;
    for (double& v : shifted.values) v += c;
    CHECK(bellman_residual(shifted, grid, kDefault, config) ==
          doctest::Approx(c * (1.0 - kDefault.gamma)).epsilon(1e-6));
}

TEST_CASE("grid refinement moves the departure state by at most 2 steps") {
    const SolverConfig coarse = small_config(251, 251);
    const SolverConfig fine = small_config(501, 501);
    const Grid gc = build_grid(coarse, kDefault);
    const Grid gf = build_grid(fine, kDefault);
    const Solution sc = value_iteration(gc, kDefault, coarse);
    const Solution sf = value_iteration(gf, kDefault, fine);
    const double dc = gc.states[sigma_departure_state(sc, gc)];
    const double df = gf.states[sigma_departure_state(sf, gf)];
    CHECK(std::abs(dc - df) <= 2.0 * gc.state_step() + 1e-12);
}
