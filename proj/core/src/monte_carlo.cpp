#include "mobility/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mobility {

std::uint64_t CounterRng::mix(std::uint64_t z) {
    // splitmix64 finalizer
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double CounterRng::uniform(std::uint64_t generation, std::uint64_t agent,
                           std::uint64_t slot) const {
    std::uint64_t h = mix(root ^ 0xA0761D6478BD642FULL);
    h = mix(h ^ (generation * 0xE7037ED1A0B428DBULL));
    h = mix(h ^ (agent * 0x8EBC6AF09C88C6E3ULL));
    h = mix(h ^ (slot * 0x589965CC75374CC3ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

namespace {

// Draw slots within one generation of an agent's stream.
enum Slot : std::uint64_t {
    kAbility = 0,
    kSuccess = 1,
    kResampleChoice = 2,
    kResampleTarget = 3,
};

} // namespace

double AgentPopulation::phi0() const {
    std::size_t d = 0;
    for (std::uint8_t c : circumstance) d += (c == 0);
    return static_cast<double>(d) / static_cast<double>(size());
}

AgentPopulation make_population(std::size_t n_agents, double phi0_init,
                                std::uint64_t root_seed) {
    if (n_agents == 0) throw DomainError("population must be nonempty");
    if (!(phi0_init >= 0.0 && phi0_init <= 1.0))
        throw DomainError("phi0_init outside [0,1]");

    AgentPopulation pop;
    pop.root_seed = root_seed;
    pop.generation = 0;
    pop.ability.resize(n_agents);
    pop.circumstance.resize(n_agents);

    const CounterRng rng{root_seed};
    const auto n_disadvantaged = static_cast<std::size_t>(
        std::llround(phi0_init * static_cast<double>(n_agents)));
    for (std::size_t i = 0; i < n_agents; ++i) {
        pop.ability[i] = rng.uniform(0, i, kAbility);
        pop.circumstance[i] = i < n_disadvantaged ? 0 : 1;
    }
    return pop;
}

GenerationOutcome mc_generation(AgentPopulation& population,
                                const ThresholdPair& pair,
                                const ModelParams& params) {
    const std::size_t n = population.size();
    if (n == 0) throw DomainError("population must be nonempty");

    const CounterRng rng{population.root_seed};
    const auto gen = static_cast<std::uint64_t>(population.generation);

    std::size_t successes = 0;
    std::size_t post_d = 0;
    std::vector<std::uint8_t> post(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t c = population.circumstance[i];
        const double p = params.sigma * population.ability[i] +
                         (c ? params.tau : 0.0);
        const double threshold = c ? pair.theta1 : pair.theta0;
        std::uint8_t c_post = c;
        if (p >= threshold && rng.uniform(gen, i, kSuccess) < p) {
            ++successes;
            if (c == 0) c_post = 1;  // successful D agents move up
        }
        post[i] = c_post;
        post_d += (c_post == 0);
    }
    const double phi_post =
        static_cast<double>(post_d) / static_cast<double>(n);

    std::size_t next_d = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p_move = post[i] ? params.p_a : params.p_d;
        std::uint8_t c_child = post[i];
        if (p_move > 0.0 && rng.uniform(gen, i, kResampleChoice) < p_move)
            c_child = rng.uniform(gen, i, kResampleTarget) < phi_post ? 0 : 1;
        population.circumstance[i] = c_child;
        population.ability[i] = rng.uniform(gen + 1, i, kAbility);
        next_d += (c_child == 0);
    }
    population.generation += 1;

    return {static_cast<double>(successes) / static_cast<double>(n),
            static_cast<double>(next_d) / static_cast<double>(n)};
}

double McReport::max_abs_z() const {
    double m = 0.0;
    for (const auto& g : generations)
        m = std::max({m, std::abs(g.z_reward), std::abs(g.z_phi0)});
    return m;
}

double McReport::fraction_z_above(double cut) const {
    if (generations.empty()) return 0.0;
    std::size_t over = 0;
    for (const auto& g : generations) {
        over += std::abs(g.z_reward) > cut;
        over += std::abs(g.z_phi0) > cut;
    }
    return static_cast<double>(over) /
           static_cast<double>(2 * generations.size());
}

namespace {

double binomial_se(double p, std::size_t n) {
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

double z_score(double observed, double predicted, double se) {
    const double diff = observed - predicted;
    if (se > 0.0) return diff / se;
    return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

} // namespace

McReport mc_rollout(double phi0_init, const Policy& policy,
                    const ModelParams& params, const McConfig& config) {
    if (config.n_agents < 1000)
        throw DomainError("mc oracle needs at least 1000 agents");
    if (config.n_generations < 1)
        throw DomainError("n_generations must be >= 1");

    AgentPopulation pop =
        make_population(config.n_agents, phi0_init, config.seed);

    McReport report;
    report.root_seed = config.seed;
    report.n_agents = config.n_agents;
    report.generations.reserve(config.n_generations);

    for (int g = 0; g < config.n_generations; ++g) {
        const double phi = pop.phi0();
        const AdmissibleRange range = admissible_range(phi, params);
        const double theta0 = range.clamp(policy(phi));
        const double theta1 =
            phi < 1.0 ? paired_threshold(phi, theta0, params)
                      : params.sigma + params.tau;

        // One-step-ahead predictions from the observed state, so sampling
        // error does not compound across generations.
        const double pred_reward = period_reward(phi, theta0, params);
        const double pred_phi = transition(phi, theta0, params);

        const GenerationOutcome out =
            mc_generation(pop, {theta0, theta1}, params);

        McGenerationStats stats;
        stats.generation = g;
        stats.phi0_before = phi;
        stats.theta0 = theta0;
        stats.theta1 = theta1;
        stats.observed_reward = out.observed_reward;
        stats.predicted_reward = pred_reward;
        stats.se_reward = binomial_se(pred_reward, config.n_agents);
        stats.z_reward =
            z_score(out.observed_reward, pred_reward, stats.se_reward);
        stats.observed_phi0_next = out.observed_phi0_next;
        stats.predicted_phi0_next = pred_phi;
        stats.se_phi0 = binomial_se(pred_phi, config.n_agents);
        stats.z_phi0 = z_score(out.observed_phi0_next, pred_phi, stats.se_phi0);
        report.generations.push_back(stats);
    }
    return report;
}

} // namespace mobility
