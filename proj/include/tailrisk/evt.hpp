#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tailrisk {

/// Linear interpolation between order statistics (R's type 7): position
/// h = (n - 1) p, result x_(floor h) + (h - floor h)(x_(floor h + 1) - x_(floor h))
/// with zero-based order statistics. `sorted` must be ascending.
double quantile_type7_sorted(std::span<const double> sorted, double p);
double quantile_type7(std::span<const double> values, double p);

struct Threshold {
    double u = 0.0;
    std::vector<double> exceedances;  ///< r - u for every r > u, in input order
};

/// Peaks-over-threshold fit of the upper tail on the standardized-residual scale.
struct GpdFit {
    double zeta = 0.0;  ///< shape
    double psi = 1.0;   ///< scale
    double u = 0.0;     ///< threshold
    std::size_t n_total = 0;
    std::size_t n_exceed = 0;
};

inline constexpr std::size_t kMinExceedances = 10;

/// u is the type-7 p_u-quantile of the residuals. Throws InsufficientTail
/// when fewer than 10 residuals lie strictly above u.
Threshold select_threshold(std::span<const double> residuals, double p_u);

/// GPD log-likelihood of the excesses; -inf outside the support.
double gpd_loglik(std::span<const double> excesses, double zeta, double psi);

struct GpdEstimate {
    double zeta = 0.0;
    double psi = 1.0;
    double loglik = 0.0;
};

/// Maximum likelihood with psi = exp(s) and zeta restricted to (-0.5, 0.99).
/// Throws FitError carrying {zeta, psi} when the optimizer fails.
GpdEstimate fit_gpd(std::span<const double> excesses);

/// Convenience: threshold selection plus MLE.
GpdFit fit_tail(std::span<const double> residuals, double p_u);

/// Tail quantile exceeded with probability alpha_tail:
///   u + (psi/zeta) [((n/N_u) alpha)^(-zeta) - 1],  zeta -> 0: u + psi ln(N_u / (n alpha)).
double gpd_tail_quantile(const GpdFit& f, double alpha_tail);

/// Mean beyond q_hat: q/(1 - zeta) + (psi - zeta u)/(1 - zeta).
double gpd_tail_es(const GpdFit& f, double q_hat);

}  // namespace tailrisk
