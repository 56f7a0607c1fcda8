#include "mobility/model.hpp"

#include <algorithm>
#include <cmath>

namespace mobility {

namespace {

void require_finite(double value, const char* field) {
    if (!std::isfinite(value)) throw NonFiniteError(field);
}

void require_state(double phi0) {
    if (!(phi0 >= 0.0 && phi0 <= 1.0))
        throw DomainError("phi0 = " + std::to_string(phi0) +
                          " outside [0,1]");
}

// Snaps theta0 into the admissible range, or throws when it is farther
// than kBoundaryTol outside it.
double admissible_or_throw(double phi0, double theta0,
                           const ModelParams& params) {
    const AdmissibleRange range = admissible_range(phi0, params);
    if (!range.contains(theta0, kBoundaryTol))
        throw InfeasibleError("theta0 = " + std::to_string(theta0) +
                              " outside admissible [" +
                              std::to_string(range.lo) + ", " +
                              std::to_string(range.hi) + "] at phi0 = " +
                              std::to_string(phi0));
    return range.clamp(theta0);
}

// theta0 must lie in the action space [0, sigma]; values within
// kBoundaryTol of the endpoints snap onto them.
double action_or_throw(double theta0, const ModelParams& params) {
    if (theta0 < -kBoundaryTol || theta0 > params.sigma + kBoundaryTol)
        throw DomainError("theta0 = " + std::to_string(theta0) +
                          " outside [0, sigma]");
    return std::clamp(theta0, 0.0, params.sigma);
}

} // namespace

ModelParams validate_params(double alpha, double sigma, double tau,
                            double gamma, double p_a, double p_d) {
    require_finite(alpha, "alpha");
    require_finite(sigma, "sigma");
    require_finite(tau, "tau");
    require_finite(gamma, "gamma");
    require_finite(p_a, "p_a");
    require_finite(p_d, "p_d");

    if (!(alpha > 0.0 && alpha < 1.0))
        throw OutOfRangeError("alpha", alpha, "0 < alpha < 1");
    if (!(sigma > 0.0 && sigma < 1.0))
        throw OutOfRangeError("sigma", sigma, "0 < sigma < 1");
    if (!(tau > 0.0))
        throw OutOfRangeError("tau", tau, "tau > 0");
    if (!(sigma + tau <= 1.0))
        throw OutOfRangeError("tau", tau, "sigma + tau <= 1");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw OutOfRangeError("gamma", gamma, "0 <= gamma < 1");
    if (!(p_a >= 0.0 && p_a <= 1.0))
        throw OutOfRangeError("p_a", p_a, "0 <= p_a <= 1");
    if (!(p_d >= 0.0 && p_d <= 1.0))
        throw OutOfRangeError("p_d", p_d, "0 <= p_d <= 1");

    return ModelParams{alpha, sigma, tau, gamma, p_a, p_d};
}

double success_probability(double ability, int circumstance,
                           const ModelParams& params) {
    if (!(ability >= 0.0 && ability <= 1.0))
        throw DomainError("ability = " + std::to_string(ability) +
                          " outside [0,1]");
    if (circumstance != 0 && circumstance != 1)
        throw DomainError("circumstance must be 0 or 1");
    return params.sigma * ability + (circumstance ? params.tau : 0.0);
}

AdmissibleRange admissible_range(double phi0, const ModelParams& params) {
    require_state(phi0);
    const double sigma = params.sigma;
    if (phi0 == 0.0) return {0.0, sigma};

    double lo = std::max(0.0, sigma * (1.0 - params.alpha / phi0));
    double hi = std::min(sigma, sigma * (1.0 - params.alpha) / phi0);
    if (lo > hi) {
        // Rounding at phi0 near 1 can cross the bounds; the true interval
        // is nonempty for every phi0 in [0,1].
        if (lo - hi > kBoundaryTol)
            throw InfeasibleError("empty admissible range at phi0 = " +
                                  std::to_string(phi0));
        lo = hi = 0.5 * (lo + hi);
    }
    return {lo, hi};
}

double paired_threshold(double phi0, double theta0,
                        const ModelParams& params) {
    require_state(phi0);
    if (phi0 == 1.0)
        throw DegenerateError("theta1 is unconstrained at phi0 = 1");
    theta0 = admissible_or_throw(phi0, theta0, params);

    const double sigma = params.sigma;
    const double tau = params.tau;
    const double phi1 = 1.0 - phi0;
    double theta1 =
        (sigma * (1.0 - params.alpha) + phi1 * tau - phi0 * theta0) / phi1;

    const double lo = tau, hi = sigma + tau;
    if (theta1 < lo - kBoundaryTol || theta1 > hi + kBoundaryTol)
        throw InfeasibleError("paired theta1 = " + std::to_string(theta1) +
                              " outside [tau, sigma+tau]");
    return std::clamp(theta1, lo, hi);
}

std::pair<double, double> allocation_fractions(double phi0,
                                               const ThresholdPair& pair,
                                               const ModelParams& params) {
    require_state(phi0);
    const double sigma = params.sigma;
    double frac_d = phi0 * (1.0 - pair.theta0 / sigma);
    double frac_a = (1.0 - phi0) * (1.0 - (pair.theta1 - params.tau) / sigma);
    if (frac_d < -kBoundaryTol || frac_a < -kBoundaryTol)
        throw InfeasibleError("negative allocation fraction");
    return {std::max(0.0, frac_d), std::max(0.0, frac_a)};
}

double success_mass_d(double phi0, double theta0, const ModelParams& params) {
    const double sigma = params.sigma;
    return phi0 / (2.0 * sigma) * (sigma * sigma - theta0 * theta0);
}

double success_mass_a(double phi0, double theta1, const ModelParams& params) {
    const double top = params.sigma + params.tau;
    return (1.0 - phi0) / (2.0 * params.sigma) * (top * top - theta1 * theta1);
}

double period_reward(double phi0, double theta0, const ModelParams& params) {
    require_state(phi0);
    if (phi0 == 1.0) {
        // The D-only branch needs no pairing and is defined on all of
        // [0, sigma]; in particular R(1, sigma) = 0.
        theta0 = action_or_throw(theta0, params);
        const double sigma = params.sigma;
        return (sigma * sigma - theta0 * theta0) / (2.0 * sigma);
    }
    theta0 = admissible_or_throw(phi0, theta0, params);
    const double theta1 = paired_threshold(phi0, theta0, params);
    return success_mass_d(phi0, theta0, params) +
           success_mass_a(phi0, theta1, params);
}

double transition_post(double phi0, double theta0, const ModelParams& params) {
    // Total on the whole action space: S(phi0, sigma) = phi0 holds at every
    // state, including states where sigma is not capacity-admissible.
    require_state(phi0);
    theta0 = action_or_throw(theta0, params);
    return phi0 - success_mass_d(phi0, theta0, params);
}

double resample_step(double phi_post, const ModelParams& params) {
    // Offspring of ex-post D parents keep D with probability 1 - p_d and
    // resample from the ex-post distribution otherwise; symmetrically for A.
    // Collapses to the identity when p_a == p_d.
    if (params.p_a == params.p_d) return phi_post;
    return phi_post * (1.0 - params.p_d) + phi_post * params.p_d * phi_post +
           (1.0 - phi_post) * params.p_a * phi_post;
}

double transition(double phi0, double theta0, const ModelParams& params) {
    return resample_step(transition_post(phi0, theta0, params), params);
}

} // namespace mobility
