#pragma once

#include <cstdint>
#include <vector>

#include "mobility/simulate.hpp"

namespace mobility {

/// Counter-based uniform generator: every draw is a pure hash of
/// (root seed, generation, agent, slot), so agent loops can run in any
/// order, or in parallel, and still produce bit-identical populations.
struct CounterRng {
    std::uint64_t root;

    static std::uint64_t mix(std::uint64_t z);
    /// Uniform double in [0, 1).
    double uniform(std::uint64_t generation, std::uint64_t agent,
                   std::uint64_t slot) const;
};

/// Finite sample of (ability, circumstance) agents. Abilities are redrawn
/// uniformly every generation; circumstances follow the inheritance and
/// resampling process.
struct AgentPopulation {
    std::vector<double> ability;
    std::vector<std::uint8_t> circumstance;  // 0 = D, 1 = A
    std::uint64_t root_seed = 0;
    int generation = 0;

    std::size_t size() const { return ability.size(); }
    double phi0() const;
};

/// Builds generation 0 with round(n * phi0_init) disadvantaged agents and
/// abilities drawn from the seeded counter stream.
AgentPopulation make_population(std::size_t n_agents, double phi0_init,
                                std::uint64_t root_seed);

struct GenerationOutcome {
    double observed_reward;     ///< successes / n
    double observed_phi0_next;  ///< D fraction after the offspring step
};

/// Advances the population one generation under the given thresholds.
/// Agents whose success probability is at least their group's threshold are
/// selected (ties select); selected agents succeed with that probability;
/// successful D agents move up before reproduction.
GenerationOutcome mc_generation(AgentPopulation& population,
                                const ThresholdPair& pair,
                                const ModelParams& params);

/// One generation of the Monte Carlo oracle compared against the
/// deterministic recurrence seeded at the observed previous state.
struct McGenerationStats {
    int generation;
    double phi0_before;
    double theta0;
    double theta1;
    double observed_reward;
    double predicted_reward;
    double se_reward;
    double z_reward;
    double observed_phi0_next;
    double predicted_phi0_next;
    double se_phi0;
    double z_phi0;
};

struct McReport {
    std::uint64_t root_seed = 0;
    std::size_t n_agents = 0;
    std::vector<McGenerationStats> generations;

    double max_abs_z() const;
    /// Fraction of recorded z statistics (reward and phi0) exceeding the cut.
    double fraction_z_above(double cut) const;
};

struct McConfig {
    std::size_t n_agents = 100000;
    int n_generations = 20;
    std::uint64_t seed = 1;
};

McReport mc_rollout(double phi0_init, const Policy& policy,
                    const ModelParams& params, const McConfig& config);

} // namespace mobility
