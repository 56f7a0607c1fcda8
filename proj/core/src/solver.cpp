#include "mobility/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "mobility/analytic.hpp"

namespace mobility {

namespace {

constexpr double kTieTol = 1e-12;

// Rewards and interpolation targets for every admissible (state, action)
// pair, flattened with per-state offsets. Actions are evaluated at their
// clamp into the continuous admissible range, so boundary grid points
// snapped into a window stay feasible.
struct BackupTables {
    std::vector<long> offset;   // n_states + 1 entries
    std::vector<double> reward;
    std::vector<int> lo_idx;    // lower bracketing state (nearest in nearest mode)
    std::vector<double> lo_w;   // weight on lo_idx; 1 in nearest mode
    double gamma = 0.0;

    long begin(int state) const { return offset[state]; }
    long end(int state) const { return offset[state + 1]; }
};

BackupTables build_tables(const Grid& grid, const ModelParams& params,
                          Interpolation mode) {
    const int n = grid.n_states();
    BackupTables tables;
    tables.gamma = params.gamma;
    tables.offset.resize(n + 1);
    tables.offset[0] = 0;
    for (int i = 0; i < n; ++i)
        tables.offset[i + 1] =
            tables.offset[i] + (grid.window_hi[i] - grid.window_lo[i] + 1);

    const long total = tables.offset[n];
    tables.reward.resize(total);
    tables.lo_idx.resize(total);
    tables.lo_w.resize(total);

    for (int i = 0; i < n; ++i) {
        const double phi = grid.states[i];
        const AdmissibleRange range = admissible_range(phi, params);
        long k = tables.offset[i];
        for (int j = grid.window_lo[i]; j <= grid.window_hi[i]; ++j, ++k) {
            const double theta = range.clamp(grid.actions[j]);
            tables.reward[k] = period_reward(phi, theta, params);
            const double next = std::clamp(transition(phi, theta, params),
                                           0.0, 1.0);
            if (mode == Interpolation::nearest) {
                tables.lo_idx[k] = grid.nearest_state(next);
                tables.lo_w[k] = 1.0;
            } else {
                const int b = grid.bracket_state(next);
                tables.lo_idx[k] = b;
                tables.lo_w[k] = (grid.states[b + 1] - next) /
                                 (grid.states[b + 1] - grid.states[b]);
            }
        }
    }
    return tables;
}

double q_value(const BackupTables& tables, std::span<const double> values,
               long k) {
    const int lo = tables.lo_idx[k];
    const double w = tables.lo_w[k];
    const double cont =
        (w == 1.0) ? values[lo] : w * values[lo] + (1.0 - w) * values[lo + 1];
    return tables.reward[k] + tables.gamma * cont;
}

template <typename Fn>
void for_each_state(int n_states, long work_per_state, Fn&& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    const long total_work = static_cast<long>(n_states) * work_per_state;
    if (hw < 2 || total_work < 100000) {
        for (int i = 0; i < n_states; ++i) fn(i);
        return;
    }
    const int n_threads = static_cast<int>(std::min<unsigned>(hw, 8));
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        const int begin = static_cast<int>(static_cast<long>(n_states) * t /
                                           n_threads);
        const int end = static_cast<int>(static_cast<long>(n_states) * (t + 1) /
                                         n_threads);
        pool.emplace_back([begin, end, &fn] {
            for (int i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Synchronous max sweep; each state reads `values` and writes its own slot.
void sweep_max(const BackupTables& tables, std::span<const double> values,
               std::span<double> out) {
    const int n = static_cast<int>(out.size());
    const long avg_window = tables.offset[n] / std::max(n, 1);
    for_each_state(n, avg_window, [&](int i) {
        double best = -std::numeric_limits<double>::infinity();
        for (long k = tables.begin(i); k < tables.end(i); ++k)
            best = std::max(best, q_value(tables, values, k));
        out[i] = best;
    });
}

// Greedy action per state, breaking ties within kTieTol toward the largest
// theta0 (the highest action index).
void sweep_greedy(const BackupTables& tables, const Grid& grid,
                  std::span<const double> values, std::span<int> out) {
    const int n = grid.n_states();
    const long avg_window = tables.offset[n] / std::max(n, 1);
    for_each_state(n, avg_window, [&](int i) {
        double best = -std::numeric_limits<double>::infinity();
        for (long k = tables.begin(i); k < tables.end(i); ++k)
            best = std::max(best, q_value(tables, values, k));
        int pick = grid.window_lo[i];
        for (long k = tables.end(i) - 1; k >= tables.begin(i); --k) {
            if (q_value(tables, values, k) >= best - kTieTol) {
                pick = grid.window_lo[i] + static_cast<int>(k - tables.begin(i));
                break;
            }
        }
        out[i] = pick;
    });
}

void sweep_policy(const BackupTables& tables, std::span<const int> policy,
                  const Grid& grid, std::span<const double> values,
                  std::span<double> out) {
    const int n = static_cast<int>(out.size());
    for_each_state(n, 1, [&](int i) {
        const long k = tables.begin(i) + (policy[i] - grid.window_lo[i]);
        out[i] = q_value(tables, values, k);
    });
}

double sup_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

double residual_of(const BackupTables& tables, std::span<const double> values) {
    std::vector<double> backed(values.size());
    sweep_max(tables, values, backed);
    return sup_diff(values, backed);
}

Solution finish_solution(std::vector<double> values, const Grid& grid,
                         const ModelParams& params, const SolverConfig& config,
                         const BackupTables& tables, long iterations,
                         bool converged) {
    Solution sol = extract_solution(values, grid, params, config);
    sol.iterations = iterations;
    sol.converged = converged;
    sol.final_residual = residual_of(tables, sol.values);
    sol.value_error_bound =
        config.tolerance * params.gamma / (1.0 - params.gamma);
    return sol;
}

} // namespace

BackupResult bellman_backup(std::span<const double> values, const Grid& grid,
                            const ModelParams& params,
                            const SolverConfig& config) {
    const BackupTables tables =
        build_tables(grid, params, config.interpolation);
    BackupResult result;
    result.values.resize(grid.n_states());
    result.greedy.resize(grid.n_states());
    sweep_max(tables, values, result.values);
    sweep_greedy(tables, grid, values, result.greedy);
    return result;
}

Solution value_iteration(const Grid& grid, const ModelParams& params,
                         const SolverConfig& config) {
    config.validate();
    const BackupTables tables =
        build_tables(grid, params, config.interpolation);

    std::vector<double> values(grid.n_states(), 0.0);
    std::vector<double> next(grid.n_states());
    long iterations = 0;
    bool converged = false;
    while (iterations < config.max_iterations) {
        ++iterations;
        sweep_max(tables, values, next);
        const double delta = sup_diff(values, next);
        values.swap(next);
        if (delta < config.tolerance) {
            converged = true;
            break;
        }
    }
    return finish_solution(std::move(values), grid, params, config, tables,
                           iterations, converged);
}

Solution policy_iteration(const Grid& grid, const ModelParams& params,
                          const SolverConfig& config) {
    config.validate();
    const BackupTables tables =
        build_tables(grid, params, config.interpolation);
    const int n = grid.n_states();

    std::vector<double> values(n, 0.0);
    std::vector<double> next(n);
    std::vector<int> policy(n);
    sweep_greedy(tables, grid, values, policy);  // myopic start

    long outer = 0;
    bool converged = false;
    while (outer < config.max_policy_iterations) {
        ++outer;
        // Evaluate the current policy to its fixed point.
        for (long k = 0; k < config.eval_max_iterations; ++k) {
            sweep_policy(tables, policy, grid, values, next);
            const double delta = sup_diff(values, next);
            values.swap(next);
            if (delta < config.eval_tolerance) break;
        }
        std::vector<int> improved(n);
        sweep_greedy(tables, grid, values, improved);
        if (improved == policy) {
            converged = true;
            break;
        }
        policy.swap(improved);
    }
    return finish_solution(std::move(values), grid, params, config, tables,
                           outer, converged);
}

Solution solve(const Grid& grid, const ModelParams& params,
               const SolverConfig& config) {
    return config.method == Method::policy_iteration
               ? policy_iteration(grid, params, config)
               : value_iteration(grid, params, config);
}

Solution extract_solution(std::span<const double> values, const Grid& grid,
                          const ModelParams& params,
                          const SolverConfig& config) {
    const BackupTables tables =
        build_tables(grid, params, config.interpolation);
    const int n = grid.n_states();

    std::vector<int> greedy(n);
    sweep_greedy(tables, grid, values, greedy);

    Solution sol;
    sol.values.assign(values.begin(), values.end());
    sol.policy_theta0.resize(n);
    sol.policy_theta1.resize(n);
    sol.aa_extent.resize(n);
    sol.aa_extent_raw.resize(n);

    const double half = 0.5 * grid.action_step();
    for (int i = 0; i < n; ++i) {
        const double phi = grid.states[i];
        const double theta0 = grid.actions[greedy[i]];
        const AdmissibleRange range = admissible_range(phi, params);

        double theta1;
        if (phi == 1.0) {
            // theta1 is unconstrained at phi0 = 1; report the equal-threshold
            // allocation clamped into its declared interval.
            theta1 = std::clamp(aa_line(phi, params), params.tau,
                                params.sigma + params.tau);
        } else {
            theta1 = paired_threshold(phi, range.clamp(theta0), params);
        }

        sol.policy_theta0[i] = theta0;
        sol.policy_theta1[i] = theta1;
        sol.aa_extent_raw[i] = theta1 - theta0;

        // Sigma convention: a top-of-window threshold that selects zero
        // D-mass ties with every larger threshold, so the equal-threshold
        // pair exists and the reported extent is zero.
        const bool zero_mass_top =
            greedy[i] == grid.window_hi[i] && theta0 >= params.sigma - half;
        sol.aa_extent[i] = zero_mass_top ? 0.0 : std::max(0.0, theta1 - theta0);
    }
    return sol;
}

double bellman_residual(const Solution& solution, const Grid& grid,
                        const ModelParams& params,
                        const SolverConfig& config) {
    const BackupTables tables =
        build_tables(grid, params, config.interpolation);
    return residual_of(tables, solution.values);
}

int sigma_departure_state(const Solution& solution, const Grid& grid) {
    const double cutoff = grid.sigma - 0.5 * grid.action_step();
    for (int i = 0; i < grid.n_states(); ++i)
        if (solution.policy_theta0[i] < cutoff) return i;
    return grid.n_states();
}

} // namespace mobility
