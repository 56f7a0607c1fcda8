#pragma once

#include <utility>

#include "mobility/errors.hpp"

namespace mobility {

/// Capacity identities are expected to hold to this absolute tolerance.
inline constexpr double kCapacityTol = 1e-12;

/// Computed thresholds and bounds within this distance of a declared
/// boundary are snapped onto it; larger violations are infeasible.
inline constexpr double kBoundaryTol = 1e-9;

/// Primitive parameters of the model.
///
/// alpha  fraction of the population offered the opportunity per generation
/// sigma  ability coefficient of the success probability
/// tau    circumstance bonus added for advantaged agents
/// gamma  per-generation discount factor (gamma = 0 is the myopic planner)
/// p_a    probability an advantaged parent's offspring resamples circumstance
/// p_d    probability a disadvantaged parent's offspring resamples circumstance
struct ModelParams {
    double alpha;
    double sigma;
    double tau;
    double gamma;
    double p_a;
    double p_d;
};

/// Validates the raw scalars and returns them as ModelParams.
///
/// Bounds: 0 < alpha < 1, 0 < sigma < 1, 0 < tau and sigma + tau <= 1,
/// 0 <= gamma < 1, p_a and p_d in [0,1]. Throws NonFiniteError or
/// OutOfRangeError naming the violated field.
ModelParams validate_params(double alpha, double sigma, double tau,
                            double gamma, double p_a, double p_d);

/// Success-probability thresholds for the two groups, linked by the
/// capacity constraint: theta0 in [0, sigma], theta1 in [tau, sigma + tau].
struct ThresholdPair {
    double theta0;
    double theta1;
};

/// Closed interval of group-D thresholds compatible with allocating
/// exactly an alpha fraction of the population.
struct AdmissibleRange {
    double lo;
    double hi;

    bool contains(double theta0, double tol = 0.0) const {
        return theta0 >= lo - tol && theta0 <= hi + tol;
    }
    double clamp(double theta0) const {
        return theta0 < lo ? lo : (theta0 > hi ? hi : theta0);
    }
};

/// Probability that an agent of the given ability and circumstance (0 = D,
/// 1 = A) succeeds at the opportunity: sigma * ability + circumstance * tau.
double success_probability(double ability, int circumstance,
                           const ModelParams& params);

/// Admissible group-D thresholds at state phi0.
///
/// lo = max(0, sigma (1 - alpha/phi0)), hi = min(sigma, sigma (1-alpha)/phi0).
/// phi0 = 0 is degenerate: every threshold selects zero D-mass, so the full
/// [0, sigma] is returned. At phi0 = 1 the range collapses to sigma (1-alpha).
AdmissibleRange admissible_range(double phi0, const ModelParams& params);

/// The group-A threshold paired with theta0 by the capacity constraint:
/// theta1 = (sigma (1-alpha) + (1-phi0) tau - phi0 theta0) / (1-phi0).
///
/// Throws DegenerateError at phi0 = 1 (theta1 unconstrained there) and
/// InfeasibleError when theta0 lies outside the admissible range by more
/// than kBoundaryTol.
double paired_threshold(double phi0, double theta0, const ModelParams& params);

/// Fractions of the whole population selected from D and from A; they sum
/// to alpha for any pair satisfying the capacity constraint.
std::pair<double, double> allocation_fractions(double phi0,
                                               const ThresholdPair& pair,
                                               const ModelParams& params);

/// Expected fraction of the population that is selected from group D and
/// succeeds: (phi0 / 2 sigma) (sigma^2 - theta0^2).
double success_mass_d(double phi0, double theta0, const ModelParams& params);

/// Expected fraction selected from group A that succeeds:
/// ((1-phi0) / 2 sigma) ((sigma+tau)^2 - theta1^2).
double success_mass_a(double phi0, double theta1, const ModelParams& params);

/// One-period reward of imposing theta0 at state phi0, with theta1 implied
/// by the capacity constraint. At phi0 = 1 only the D-term remains.
double period_reward(double phi0, double theta0, const ModelParams& params);

/// Ex-post D fraction after the successful D-agents move up:
/// phi0 - success_mass_d(phi0, theta0).
double transition_post(double phi0, double theta0, const ModelParams& params);

/// Applies the offspring resampling step to an ex-post state. The identity
/// map when p_a == p_d.
double resample_step(double phi_post, const ModelParams& params);

/// Next-generation D fraction: resample_step(transition_post(...)).
double transition(double phi0, double theta0, const ModelParams& params);

} // namespace mobility
