#pragma once

#include "tailrisk/dist.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace tailrisk {

/// GARCH(1,1) on demeaned losses: sigma2_t = omega + alpha * eps_{t-1}^2 + beta * sigma2_{t-1}.
struct GarchParams {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double mu = 0.0;
    std::optional<double> nu;  ///< present for t innovations

    [[nodiscard]] bool valid() const noexcept {
        return omega > 0.0 && alpha >= 0.0 && beta >= 0.0 && alpha + beta < 1.0 && (!nu || *nu > 2.0);
    }
    [[nodiscard]] Dist innovation() const { return nu ? Dist::standardized_t(*nu) : Dist::normal(); }
};

struct FittedGarch {
    GarchParams params;
    std::vector<double> sigma;          ///< conditional SD for every window point
    std::vector<double> std_residuals;  ///< (loss - mu) / sigma
    double loglik = 0.0;
    Dist innovation;
    bool converged = true;
};

/// Runs the variance recursion over `values` with fixed parameters. The
/// recursion starts from the sample variance of the demeaned window.
FittedGarch filter_garch(std::span<const double> values, const GarchParams& params);

/// Exact conditional log-likelihood of `values` under `params`.
double garch_loglik(std::span<const double> values, const GarchParams& params);

/// Maximum likelihood fit with the window mean as mu. Multi-start
/// Nelder-Mead over an unconstrained reparameterization. Throws FitError
/// (best iterate in the order omega, alpha, beta[, nu]) when no start converges.
FittedGarch fit_garch(std::span<const double> values, DistKind innovation);

/// One-step-ahead conditional SD given the last loss of the fitted window.
double forecast_sigma(const FittedGarch& fit, double last_loss);

/// Simulates a plain GARCH(1,1) path (used by recovery tests and examples).
std::vector<double> simulate_garch(const GarchParams& params, std::size_t n, std::uint64_t seed,
                                   std::size_t burn_in = 500);

/// Log-variance recursion
///   ln s2_t = omega + alpha z_{t-1} + gamma_coef (|z_{t-1}| - E|z|) + beta ln s2_{t-1}
/// with standardized-t(nu) innovations.
struct EgarchParams {
    double omega = -0.40;
    double alpha = -0.09;
    double gamma_coef = 0.16;
    double beta = 0.96;
    double nu = 6.0;
};

struct SimPath {
    std::vector<double> losses;
    std::vector<double> sigma_true;  ///< gamma[t] * eGARCH sigma_t
    std::vector<double> gamma;
    std::vector<double> z;
    double nu = 0.0;
};

/// Deterministic per (seed, stream): the innovations do not depend on the
/// gamma profile, so scenarios share the same z draws.
SimPath simulate_egarch(const EgarchParams& params, std::size_t n, std::uint64_t seed,
                        std::span<const double> gamma, std::uint64_t stream = 0);

/// Per-step standardized-t VaR and ES multipliers for a unit scale.
std::pair<double, double> standardized_t_var_es(double nu, double alpha_tail);

/// True conditional VaR and ES of the simulated path at tail probability alpha_tail.
std::pair<std::vector<double>, std::vector<double>> true_var_es(const SimPath& path, double alpha_tail);

}  // namespace tailrisk
