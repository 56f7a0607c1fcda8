#pragma once

#include <optional>

#include "mobility/model.hpp"

namespace mobility {

/// The tipping state phi0* below which equal (sigma) thresholds are optimal
/// and above which strict affirmative action is optimal.
struct TippingReport {
    double phi_star;       ///< clamped into [0, 1 - alpha]
    double raw_phi_tilde;  ///< 1 - (alpha sigma / 2 tau)(1 + sqrt(1 + 2 tau gamma/(1-gamma)))
    bool clamped_low;      ///< raw value fell below 0 (persistent affirmative action)
    bool clamped_high;     ///< raw value exceeded 1 - alpha

    bool persistent() const { return phi_star == 0.0; }
};

TippingReport tipping_point(const ModelParams& params);

/// Closed-form value of a state at or below the tipping point, where the
/// sigma policy is optimal and the state is a fixed point:
/// V(phi0) = (alpha/(1-gamma)) ((sigma+tau) - sigma alpha / (2(1-phi0))).
///
/// Throws OutsideSigmaRegionError when phi0 exceeds phi0* by more than 1e-12.
double sigma_region_value(double phi0, const ModelParams& params);

/// d/dphi0 of sigma_region_value: -sigma alpha^2 / (2(1-gamma)(1-phi0)^2).
double sigma_region_value_derivative(double phi0, const ModelParams& params);

/// dR/dtheta0 at (phi0, theta0); zero exactly on the affirmative-action
/// line, positive below it, negative above it. Degenerate at phi0 in {0,1}.
double reward_dtheta(double phi0, double theta0, const ModelParams& params);

/// dS/dtheta0 = phi0 theta0 / sigma for the ex-post transition.
double transition_dtheta(double phi0, double theta0, const ModelParams& params);

/// Residual of the first-order condition that defines raw_phi_tilde:
/// tau (1-phi0)^2 - alpha sigma (1-phi0) - gamma sigma^2 alpha^2 / (2(1-gamma)).
double foc_residual(double phi0, const ModelParams& params);

/// The unique equal-threshold allocation at phi0:
/// theta_eq = sigma (1-alpha) + tau (1-phi0). Thresholds below it pair with
/// a strictly larger theta1, i.e. exhibit strict affirmative action.
double aa_line(double phi0, const ModelParams& params);

/// Minimum discount factor for persistent affirmative action (phi0* = 0)
/// at the given (alpha, tau, sigma). Reported as 0 when tau <= alpha sigma,
/// where every discount factor yields persistence.
double gamma_star(double alpha, double tau, double sigma);

/// Maximum tau keeping affirmative action persistent under the sigma = 1 - tau
/// convention. Throws UndefinedBoundaryError at gamma = 0.
double tau_star(double alpha, double gamma);

/// Minimum opportunity fraction for persistent affirmative action:
/// alpha* = (2 tau / sigma) / (1 + sqrt(1 + 2 tau gamma / (1-gamma))).
double alpha_star(double tau, double gamma, double sigma);

/// The three persistence boundaries for one (alpha, tau, gamma) triple.
/// When sigma_locked_to_tau is set, sigma = 1 - tau was imposed throughout
/// (the convention behind the parameter-region plots); otherwise gamma_star
/// and alpha_star use the sigma passed by the caller and only tau_star
/// carries the convention.
struct RegimeBoundaries {
    std::optional<double> gamma_star;
    std::optional<double> tau_star;  ///< absent at gamma = 0
    std::optional<double> alpha_star;
    bool sigma_locked_to_tau = false;
};

RegimeBoundaries regime_boundaries(double alpha, double tau, double gamma,
                                   std::optional<double> sigma = std::nullopt);

} // namespace mobility
