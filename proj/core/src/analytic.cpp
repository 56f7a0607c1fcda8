#include "mobility/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mobility {

namespace {

constexpr double kGammaCeiling = 1.0 - 1e-12;

void require_state(double phi0) {
    if (!(phi0 >= 0.0 && phi0 <= 1.0))
        throw DomainError("phi0 = " + std::to_string(phi0) +
                          " outside [0,1]");
}

// 2 tau gamma / (1 - gamma), evaluated before the square root so gamma
// close to 1 cannot cancel inside it.
double patience_term(double tau, double gamma) {
    if (gamma > kGammaCeiling)
        throw DomainError("gamma too close to 1");
    return 2.0 * tau * gamma / (1.0 - gamma);
}

} // namespace

TippingReport tipping_point(const ModelParams& params) {
    const double root = std::sqrt(1.0 + patience_term(params.tau, params.gamma));
    const double raw =
        1.0 - params.alpha * params.sigma / (2.0 * params.tau) * (1.0 + root);
    const double hi = 1.0 - params.alpha;

    TippingReport report;
    report.raw_phi_tilde = raw;
    report.clamped_low = raw < 0.0;
    report.clamped_high = raw > hi;
    report.phi_star = std::clamp(raw, 0.0, hi);
    return report;
}

double sigma_region_value(double phi0, const ModelParams& params) {
    require_state(phi0);
    const double star = tipping_point(params).phi_star;
    if (phi0 > star + 1e-12)
        throw OutsideSigmaRegionError(
            "phi0 = " + std::to_string(phi0) + " beyond tipping point " +
            std::to_string(star));
    return params.alpha / (1.0 - params.gamma) *
           (params.sigma + params.tau -
            params.sigma * params.alpha / (2.0 * (1.0 - phi0)));
}

double sigma_region_value_derivative(double phi0, const ModelParams& params) {
    require_state(phi0);
    const double star = tipping_point(params).phi_star;
    if (phi0 > star + 1e-12)
        throw OutsideSigmaRegionError(
            "phi0 = " + std::to_string(phi0) + " beyond tipping point " +
            std::to_string(star));
    const double rem = 1.0 - phi0;
    return -params.sigma * params.alpha * params.alpha /
           (2.0 * (1.0 - params.gamma) * rem * rem);
}

double reward_dtheta(double phi0, double theta0, const ModelParams& params) {
    require_state(phi0);
    if (phi0 == 0.0 || phi0 == 1.0)
        throw DegenerateError("reward derivative undefined at phi0 = " +
                              std::to_string(phi0));
    const double phi1 = 1.0 - phi0;
    return phi0 / params.sigma *
           (params.sigma * (1.0 - params.alpha) + phi1 * params.tau - theta0) /
           phi1;
}

double transition_dtheta(double phi0, double theta0,
                         const ModelParams& params) {
    require_state(phi0);
    return phi0 * theta0 / params.sigma;
}

double foc_residual(double phi0, const ModelParams& params) {
    const double rem = 1.0 - phi0;
    const double sa = params.sigma * params.alpha;
    return params.tau * rem * rem - sa * rem -
           params.gamma * sa * sa / (2.0 * (1.0 - params.gamma));
}

double aa_line(double phi0, const ModelParams& params) {
    require_state(phi0);
    return params.sigma * (1.0 - params.alpha) + params.tau * (1.0 - phi0);
}

double gamma_star(double alpha, double tau, double sigma) {
    if (tau <= alpha * sigma) return 0.0;
    const double ratio = 2.0 * tau / (alpha * sigma) - 1.0;
    const double denom = (ratio * ratio - 1.0) / (2.0 * tau) + 1.0;
    return 1.0 - 1.0 / denom;
}

double tau_star(double alpha, double gamma) {
    if (gamma <= 0.0)
        throw UndefinedBoundaryError("tau* undefined at gamma = 0");
    if (gamma > kGammaCeiling) throw DomainError("gamma too close to 1");
    const double c = gamma * alpha * alpha / (1.0 - gamma);
    const double root =
        std::sqrt((1.0 + alpha) * (1.0 + alpha) + 2.0 * c);
    return 1.0 - (root - (1.0 + alpha)) / c;
}

double alpha_star(double tau, double gamma, double sigma) {
    const double root = std::sqrt(1.0 + patience_term(tau, gamma));
    return 2.0 * tau / sigma / (1.0 + root);
}

RegimeBoundaries regime_boundaries(double alpha, double tau, double gamma,
                                   std::optional<double> sigma) {
    RegimeBoundaries out;
    out.sigma_locked_to_tau = !sigma.has_value();
    const double s = sigma.value_or(1.0 - tau);
    out.gamma_star = gamma_star(alpha, tau, s);
    out.alpha_star = alpha_star(tau, gamma, s);
    if (gamma > 0.0) out.tau_star = tau_star(alpha, gamma);
    return out;
}

} // namespace mobility
