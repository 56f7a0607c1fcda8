#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>

#include "csv.hpp"
#include "json.hpp"
#include "mobility/analytic.hpp"
#include "mobility/monte_carlo.hpp"
#include "mobility/simulate.hpp"

namespace mobility::cli {

namespace {

using nlohmann::json;

void ensure_out_dir(const CommandOptions& options) {
    std::filesystem::create_directories(options.out_dir);
}

void write_table(const RunConfig& config, const CommandOptions& options,
                 const std::string& stem, const Table& table) {
    if (config.output.format == "json") {
        write_json_table(options.out_dir / (stem + ".json"), table);
    } else {
        write_csv(options.out_dir / (stem + ".csv"), table,
                  config.output.precision);
    }
}

void write_report(const CommandOptions& options, const std::string& name,
                  const json& doc) {
    std::ofstream out(options.out_dir / name, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " +
                                 (options.out_dir / name).string());
    out << doc.dump(2) << '\n';
}

json params_json(const ModelParams& p) {
    return json{{"alpha", p.alpha}, {"sigma", p.sigma}, {"tau", p.tau},
                {"gamma", p.gamma}, {"p_a", p.p_a},     {"p_d", p.p_d}};
}

json optional_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

struct SolveArtifacts {
    Grid grid;
    Solution solution;
};

SolveArtifacts run_solver(const RunConfig& config) {
    SolveArtifacts art;
    art.grid = build_grid(config.solver, config.model);
    art.solution = solve(art.grid, config.model, config.solver);
    return art;
}

json solve_report_json(const RunConfig& config, const SolveArtifacts& art) {
    const TippingReport tip = tipping_point(config.model);
    const int depart = sigma_departure_state(art.solution, art.grid);
    const double depart_phi = depart < art.grid.n_states()
                                  ? art.grid.states[depart]
                                  : std::numeric_limits<double>::quiet_NaN();
    json doc;
    doc["params"] = params_json(config.model);
    doc["method"] = config.solver.method == Method::policy_iteration
                        ? "policy-iteration"
                        : "value-iteration";
    doc["interpolation"] =
        config.solver.interpolation == Interpolation::nearest ? "nearest"
                                                              : "linear";
    doc["n_states"] = config.solver.n_states;
    doc["n_actions"] = config.solver.n_actions;
    doc["iterations"] = art.solution.iterations;
    doc["converged"] = art.solution.converged;
    doc["final_residual"] = art.solution.final_residual;
    doc["value_error_bound"] = art.solution.value_error_bound;
    doc["tipping_cross_check"] = {
        {"analytic_phi_star", tip.phi_star},
        {"raw_phi_tilde", tip.raw_phi_tilde},
        {"persistent", tip.persistent()},
        {"grid_departure_phi0", depart_phi},
        {"difference", std::isnan(depart_phi)
                           ? std::numeric_limits<double>::quiet_NaN()
                           : std::abs(depart_phi - tip.phi_star)}};
    return doc;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i)
        out[i] = lo + (hi - lo) * static_cast<double>(i) / (count - 1);
    return out;
}

const SweepAxis& axis_of(const SweepBlock& sweep, const std::string& name) {
    for (const auto& axis : sweep.axes)
        if (axis.param == name) return axis;
    throw ConfigError("sweep axis '" + name + "' missing");
}

// ---------------------------------------------------------------------------
// validate: named cross-checks with one pass/fail line each

struct CheckResult {
    std::string name;
    bool pass;
    std::string detail;
};

class CheckList {
public:
    void add(const std::string& name, bool pass, const std::string& detail) {
        results_.push_back({name, pass, detail});
        std::cout << (pass ? "PASS " : "FAIL ") << name
                  << (detail.empty() ? "" : "  (" + detail + ")") << '\n';
    }
    bool all_passed() const {
        return std::all_of(results_.begin(), results_.end(),
                           [](const CheckResult& r) { return r.pass; });
    }
    json to_json() const {
        json arr = json::array();
        for (const auto& r : results_)
            arr.push_back(json{{"name", r.name},
                               {"pass", r.pass},
                               {"detail", r.detail}});
        return arr;
    }

private:
    std::vector<CheckResult> results_;
};

std::string fmt(double v) { return format_number(v, 6); }

void check_derivatives(CheckList& checks, const ModelParams& params) {
    std::mt19937_64 rng(915234);
    std::uniform_real_distribution<double> state(0.05, 0.95);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double h = 1e-5;

    double worst_reward = 0.0, worst_state = 0.0, worst_value = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double phi0 = state(rng);
        const AdmissibleRange range = admissible_range(phi0, params);
        if (range.hi - range.lo < 3 * h) continue;
        const double theta0 =
            range.lo + h + unit(rng) * (range.hi - range.lo - 2 * h);

        const double fd_r = (period_reward(phi0, theta0 + h, params) -
                             period_reward(phi0, theta0 - h, params)) /
                            (2 * h);
        const double an_r = reward_dtheta(phi0, theta0, params);
        worst_reward = std::max(
            worst_reward, std::abs(fd_r - an_r) / std::max(1.0, std::abs(an_r)));

        const double fd_s = (transition_post(phi0, theta0 + h, params) -
                             transition_post(phi0, theta0 - h, params)) /
                            (2 * h);
        const double an_s = transition_dtheta(phi0, theta0, params);
        worst_state = std::max(
            worst_state, std::abs(fd_s - an_s) / std::max(1.0, std::abs(an_s)));
    }

    const double star = tipping_point(params).phi_star;
    if (star > 2 * h) {
        for (int it = 0; it < 100; ++it) {
            const double phi0 = h + unit(rng) * (star - 2 * h);
            const double fd = (sigma_region_value(phi0 + h, params) -
                               sigma_region_value(phi0 - h, params)) /
                              (2 * h);
            const double an = sigma_region_value_derivative(phi0, params);
            worst_value = std::max(
                worst_value, std::abs(fd - an) / std::max(1.0, std::abs(an)));
        }
    }

    checks.add("derivative-reward-fd", worst_reward <= 1e-6,
               "max rel err " + fmt(worst_reward));
    checks.add("derivative-transition-fd", worst_state <= 1e-6,
               "max rel err " + fmt(worst_state));
    checks.add("derivative-value-fd", worst_value <= 1e-6,
               "max rel err " + fmt(worst_value));

    const TippingReport tip = tipping_point(params);
    if (tip.raw_phi_tilde > 0.0 && tip.raw_phi_tilde < 1.0 - params.alpha) {
        const double res = std::abs(foc_residual(tip.raw_phi_tilde, params));
        checks.add("foc-root", res <= 1e-10, "|residual| " + fmt(res));
    } else {
        checks.add("foc-root", true, "raw phi_tilde outside (0, 1-alpha)");
    }
}

void check_capacity(CheckList& checks, const ModelParams& params) {
    std::mt19937_64 rng(7081);
    std::uniform_real_distribution<double> state(0.01, 0.99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    bool mirror_ok = true;
    for (int it = 0; it < 1000; ++it) {
        const double phi0 = state(rng);
        const AdmissibleRange range = admissible_range(phi0, params);
        const double theta0 = range.lo + unit(rng) * (range.hi - range.lo);
        const double theta1 = paired_threshold(phi0, theta0, params);
        auto [d, a] = allocation_fractions(phi0, {theta0, theta1}, params);
        worst = std::max(worst, std::abs(d + a - params.alpha));
        const double eq = aa_line(phi0, params);
        if (std::abs(theta0 - eq) > 1e-12)
            mirror_ok = mirror_ok && ((eq > theta0) == (theta1 > theta0));
    }
    checks.add("capacity-conservation", worst <= kCapacityTol,
               "max |sum - alpha| " + fmt(worst));
    checks.add("aa-line-mirror", mirror_ok, "");
}

void check_solution(CheckList& checks, const RunConfig& config,
                    const SolveArtifacts& art) {
    const ModelParams& params = config.model;
    const Grid& grid = art.grid;
    const Solution& sol = art.solution;
    const int n = grid.n_states();
    const double h = grid.action_step();
    const double residual =
        bellman_residual(sol, grid, params, config.solver);

    checks.add("solver-converged", sol.converged,
               std::to_string(sol.iterations) + " iterations");
    checks.add("bellman-residual", residual <= 1e-7,
               "sup residual " + fmt(residual));

    bool values_in_bound = true;
    const double bound =
        params.alpha * (params.sigma + params.tau) / (1.0 - params.gamma);
    for (double v : sol.values)
        values_in_bound = values_in_bound && v >= 0.0 && v <= bound + 1e-9;
    checks.add("value-bounds", values_in_bound,
               "upper bound " + fmt(bound));

    if (params.p_a <= params.p_d) {
        bool monotone = true, concave = true, policy_mono = true,
             extent_mono = true, weak_aa = true;
        for (int i = 0; i + 1 < n; ++i) {
            monotone = monotone && sol.values[i] >= sol.values[i + 1] - 1e-9;
            policy_mono = policy_mono && sol.policy_theta0[i + 1] <=
                                             sol.policy_theta0[i] + h + 1e-12;
            extent_mono = extent_mono &&
                          sol.aa_extent[i + 1] >= sol.aa_extent[i] - h - 1e-12;
        }
        for (int i = 1; i + 1 < n; ++i)
            concave = concave && sol.values[i + 1] - 2 * sol.values[i] +
                                         sol.values[i - 1] <=
                                     1e-7;
        for (int i = 0; i < n; ++i)
            weak_aa = weak_aa &&
                      sol.policy_theta0[i] <= sol.policy_theta1[i] + h + 1e-12;

        checks.add("value-monotone", monotone, "");
        checks.add("value-concave", concave, "");
        checks.add("policy-monotone", policy_mono, "");
        checks.add("aa-extent-monotone", extent_mono, "");
        checks.add("weak-aa", weak_aa, "");

        const TippingReport tip = tipping_point(params);
        const int depart = sigma_departure_state(sol, grid);
        const double depart_phi =
            depart < n ? grid.states[depart] : 1.0 + grid.state_step();
        const double diff = std::abs(depart_phi - tip.phi_star);
        checks.add("tipping-agreement", diff <= 2.0 * grid.state_step() + 1e-12,
                   "departure " + fmt(depart_phi) + " vs phi* " +
                       fmt(tip.phi_star));

        double worst_value_gap = 0.0;
        for (int i = 0; i < n; ++i) {
            if (grid.states[i] >= tip.phi_star - 2.0 * grid.state_step())
                break;
            worst_value_gap = std::max(
                worst_value_gap,
                std::abs(sol.values[i] -
                         sigma_region_value(grid.states[i], params)));
        }
        checks.add("sigma-region-value", worst_value_gap <= 5e-3,
                   "max gap " + fmt(worst_value_gap));

        bool floor_ok = true, fixed_ok = true;
        for (int k = 0; k <= 20; ++k) {
            const double phi0 = k / 20.0;
            const AbsorbingReport rep = absorbing_state(
                phi0, sol, grid, params, config.simulate.horizon);
            floor_ok = floor_ok && rep.phi_absorbing >=
                                       tip.phi_star - 2.0 * grid.state_step() -
                                           1e-9;
            if (phi0 < tip.phi_star - 1e-12 && params.p_a == 0.0 &&
                params.p_d == 0.0)
                fixed_ok =
                    fixed_ok && std::abs(rep.phi_absorbing - phi0) <= 1e-9;
        }
        checks.add("absorbing-floor", floor_ok, "");
        checks.add("fixed-points-below-tipping", fixed_ok, "");
    }

    // return consistency at the configured initial state
    const Trajectory traj = rollout(config.simulate.phi0_init,
                                    greedy_policy(sol, grid), params, 400);
    const double ret = discounted_return(traj, params.gamma);
    const double predicted =
        interpolate_value(sol.values, grid, config.simulate.phi0_init,
                          config.solver.interpolation);
    const double tol = 1e-3 + return_tail_bound(params, 400);
    checks.add("return-consistency", std::abs(ret - predicted) <= tol,
               "|return - value| " + fmt(std::abs(ret - predicted)));
}

void check_monte_carlo(CheckList& checks, const RunConfig& config,
                       const SolveArtifacts& art) {
    if (!config.simulate.mc) return;
    const McBlock& mc = *config.simulate.mc;
    McConfig mc_config;
    mc_config.n_agents = mc.n_agents;
    mc_config.n_generations = mc.generations;
    mc_config.seed = mc.seed;
    const McReport report =
        mc_rollout(config.simulate.phi0_init,
                   greedy_policy(art.solution, art.grid), config.model,
                   mc_config);
    const double frac = report.fraction_z_above(3.0);
    checks.add("mc-z-budget", frac <= 0.02,
               "fraction |z|>3 = " + fmt(frac) + ", max |z| " +
                   fmt(report.max_abs_z()));
}

json mc_report_json(const McReport& report) {
    json doc;
    doc["root_seed"] = report.root_seed;
    doc["n_agents"] = report.n_agents;
    doc["n_generations"] = report.generations.size();
    doc["fraction_z_above_3"] = report.fraction_z_above(3.0);
    doc["max_abs_z"] = report.max_abs_z();
    json gens = json::array();
    for (const auto& g : report.generations) {
        gens.push_back(json{{"generation", g.generation},
                            {"phi0_before", g.phi0_before},
                            {"theta0", g.theta0},
                            {"theta1", g.theta1},
                            {"observed_reward", g.observed_reward},
                            {"predicted_reward", g.predicted_reward},
                            {"se_reward", g.se_reward},
                            {"z_reward", g.z_reward},
                            {"observed_phi0_next", g.observed_phi0_next},
                            {"predicted_phi0_next", g.predicted_phi0_next},
                            {"se_phi0", g.se_phi0},
                            {"z_phi0", g.z_phi0}});
    }
    doc["generations"] = std::move(gens);
    return doc;
}

} // namespace

int cmd_analytic(const RunConfig& config, const CommandOptions& options) {
    const ModelParams& p = config.model;
    const TippingReport tip = tipping_point(p);
    const RegimeBoundaries free_sigma =
        regime_boundaries(p.alpha, p.tau, p.gamma, p.sigma);
    const RegimeBoundaries convention =
        regime_boundaries(p.alpha, p.tau, p.gamma);

    json doc;
    doc["params"] = params_json(p);
    doc["tipping"] = {{"phi_star", tip.phi_star},
                      {"raw_phi_tilde", tip.raw_phi_tilde},
                      {"clamped_low", tip.clamped_low},
                      {"clamped_high", tip.clamped_high},
                      {"persistent", tip.persistent()}};
    doc["boundaries_model_sigma"] = {
        {"gamma_star", optional_json(free_sigma.gamma_star)},
        {"alpha_star", optional_json(free_sigma.alpha_star)},
        {"tau_star_sigma_convention", optional_json(free_sigma.tau_star)}};
    doc["boundaries_sigma_one_minus_tau"] = {
        {"gamma_star", optional_json(convention.gamma_star)},
        {"alpha_star", optional_json(convention.alpha_star)},
        {"tau_star", optional_json(convention.tau_star)}};

    json aa = json::array();
    for (double phi0 : linspace(0.0, 1.0, 11))
        aa.push_back(json{{"phi0", phi0}, {"theta_eq", aa_line(phi0, p)}});
    doc["aa_line_samples"] = std::move(aa);

    json sigma_samples = json::array();
    for (double phi0 : linspace(0.0, tip.phi_star, 11)) {
        sigma_samples.push_back(
            json{{"phi0", phi0},
                 {"value", sigma_region_value(phi0, p)},
                 {"derivative", sigma_region_value_derivative(phi0, p)}});
    }
    doc["sigma_region_samples"] = std::move(sigma_samples);

    ensure_out_dir(options);
    write_report(options, "analytic_report.json", doc);

    std::cout << "phi_star " << format_number(tip.phi_star, 9)
              << (tip.persistent() ? " (persistent affirmative action)" : "")
              << "\nraw_phi_tilde " << format_number(tip.raw_phi_tilde, 9)
              << "\ngamma_star " << format_number(*free_sigma.gamma_star, 9)
              << "\nalpha_star " << format_number(*free_sigma.alpha_star, 9)
              << "\ntau_star "
              << (convention.tau_star
                      ? format_number(*convention.tau_star, 9)
                      : std::string("undefined (gamma = 0)"))
              << '\n';
    return kExitOk;
}

int cmd_solve(const RunConfig& config, const CommandOptions& options) {
    const SolveArtifacts art = run_solver(config);

    Table policy;
    policy.header = {"phi0", "theta0", "theta1", "aa_extent", "value"};
    for (int i = 0; i < art.grid.n_states(); ++i)
        policy.rows.push_back({art.grid.states[i], art.solution.policy_theta0[i],
                               art.solution.policy_theta1[i],
                               art.solution.aa_extent[i],
                               art.solution.values[i]});

    ensure_out_dir(options);
    write_table(config, options, "policy", policy);
    write_report(options, "solve_report.json",
                 solve_report_json(config, art));

    std::cout << (art.solution.converged ? "converged" : "NOT converged")
              << " after " << art.solution.iterations
              << " iterations, residual "
              << format_number(art.solution.final_residual, 6) << '\n';
    return art.solution.converged ? kExitOk : kExitNonConvergence;
}

int cmd_simulate(const RunConfig& config, const CommandOptions& options) {
    const SolveArtifacts art = run_solver(config);
    const Policy policy = greedy_policy(art.solution, art.grid);

    const Trajectory traj = rollout(config.simulate.phi0_init, policy,
                                    config.model, config.simulate.horizon);
    Table trajectory;
    trajectory.header = {"t",      "phi0",   "theta0",
                         "theta1", "reward", "discounted_cum"};
    for (const auto& s : traj.steps)
        trajectory.rows.push_back({static_cast<double>(s.t), s.phi0, s.theta0,
                                   s.theta1, s.reward,
                                   s.discounted_cumulative});

    Table absorbing;
    absorbing.header = {"phi0_init", "phi_absorbing", "settled"};
    for (double phi0 :
         linspace(0.0, 1.0, config.simulate.initial_states)) {
        const AbsorbingReport rep = absorbing_state(
            phi0, art.solution, art.grid, config.model,
            config.simulate.horizon);
        absorbing.rows.push_back(
            {phi0, rep.phi_absorbing, rep.settled ? 1.0 : 0.0});
    }

    ensure_out_dir(options);
    write_table(config, options, "trajectory", trajectory);
    write_table(config, options, "absorbing", absorbing);

    if (config.simulate.baseline) {
        const Trajectory drift = no_allocation_rollout(
            config.simulate.phi0_init, config.model, config.simulate.horizon);
        Table baseline;
        baseline.header = trajectory.header;
        for (const auto& s : drift.steps)
            baseline.rows.push_back({static_cast<double>(s.t), s.phi0,
                                     s.theta0, s.theta1, s.reward,
                                     s.discounted_cumulative});
        write_table(config, options, "baseline", baseline);
    }

    if (config.simulate.mc) {
        McConfig mc_config;
        mc_config.n_agents = config.simulate.mc->n_agents;
        mc_config.n_generations = config.simulate.mc->generations;
        mc_config.seed = config.simulate.mc->seed;
        const McReport report = mc_rollout(config.simulate.phi0_init, policy,
                                           config.model, mc_config);
        write_report(options, "mc_report.json", mc_report_json(report));
    }

    std::cout << "trajectory horizon " << config.simulate.horizon
              << ", final phi0 "
              << format_number(traj.steps.back().phi0, 9) << '\n';
    return art.solution.converged ? kExitOk : kExitNonConvergence;
}

int cmd_sweep(const RunConfig& config, const CommandOptions& options) {
    const SweepAxis& alpha_axis = axis_of(config.sweep, "alpha");
    const SweepAxis& tau_axis = axis_of(config.sweep, "tau");
    const SweepAxis& gamma_axis = axis_of(config.sweep, "gamma");

    if (!(alpha_axis.min > 0.0 && alpha_axis.max < 1.0))
        throw ConfigError("sweep alpha axis must stay inside (0,1)");
    if (!(tau_axis.min > 0.0 && tau_axis.max < 1.0))
        throw ConfigError("sweep tau axis must stay inside (0,1)");
    if (!(gamma_axis.min >= 0.0 && gamma_axis.max < 1.0))
        throw ConfigError("sweep gamma axis must stay inside [0,1)");

    const std::vector<double> alphas =
        linspace(alpha_axis.min, alpha_axis.max, alpha_axis.count);
    const std::vector<double> taus =
        linspace(tau_axis.min, tau_axis.max, tau_axis.count);
    const std::vector<double> gammas =
        linspace(gamma_axis.min, gamma_axis.max, gamma_axis.count);

    // Regions of persistent affirmative action under sigma = 1 - tau.
    Table regions;
    regions.header = {"alpha", "tau", "gamma", "phi_star", "persistent"};
    for (double alpha : alphas) {
        for (double tau : taus) {
            for (double gamma : gammas) {
                const ModelParams p =
                    validate_params(alpha, 1.0 - tau, tau, gamma, 0.0, 0.0);
                const TippingReport tip = tipping_point(p);
                regions.rows.push_back({alpha, tau, gamma, tip.phi_star,
                                        tip.persistent() ? 1.0 : 0.0});
            }
        }
    }

    Table gamma_table;
    gamma_table.header = {"alpha", "tau", "gamma_star"};
    for (double alpha : alphas)
        for (double tau : taus)
            gamma_table.rows.push_back(
                {alpha, tau, gamma_star(alpha, tau, 1.0 - tau)});

    Table tau_table;
    tau_table.header = {"alpha", "gamma", "tau_star"};
    for (double alpha : alphas)
        for (double gamma : gammas)
            if (gamma > 0.0)
                tau_table.rows.push_back({alpha, gamma, tau_star(alpha, gamma)});

    Table alpha_table;
    alpha_table.header = {"tau", "gamma", "alpha_star"};
    for (double tau : taus)
        for (double gamma : gammas)
            alpha_table.rows.push_back(
                {tau, gamma, alpha_star(tau, gamma, 1.0 - tau)});

    ensure_out_dir(options);
    write_table(config, options, "regions", regions);
    write_table(config, options, "gamma_star", gamma_table);
    write_table(config, options, "tau_star", tau_table);
    write_table(config, options, "alpha_star", alpha_table);

    std::cout << "sweep lattice " << alphas.size() << "x" << taus.size()
              << "x" << gammas.size() << " written\n";
    return kExitOk;
}

int cmd_validate(const RunConfig& config, const CommandOptions& options) {
    CheckList checks;
    check_derivatives(checks, config.model);
    check_capacity(checks, config.model);

    SolveArtifacts art = run_solver(config);
    if (options.inject_fault) {
        // Negative control: a corrupted value table must trip the
        // Bellman-residual certificate.
        art.solution.values[art.grid.n_states() / 2] += 1e-3;
    }
    check_solution(checks, config, art);
    check_monte_carlo(checks, config, art);

    ensure_out_dir(options);
    json doc;
    doc["params"] = params_json(config.model);
    doc["fault_injected"] = options.inject_fault;
    doc["checks"] = checks.to_json();
    doc["all_passed"] = checks.all_passed();
    write_report(options, "validate_report.json", doc);

    if (!art.solution.converged) return kExitNonConvergence;
    return checks.all_passed() ? kExitOk : kExitInvariantFailure;
}

} // namespace mobility::cli
