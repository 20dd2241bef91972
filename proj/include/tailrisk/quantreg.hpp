#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace tailrisk {

/// rho_tau(x) = x (tau - 1[x <= 0]).
inline double check_loss(double x, double tau) noexcept { return x * (tau - (x <= 0.0 ? 1.0 : 0.0)); }

double check_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                       const Eigen::VectorXd& beta, double tau);

struct QrFit {
    Eigen::VectorXd beta;  ///< intercept first when the design has one
    double tau = 0.5;
    double objective = 0.0;
    /// Rows interpolated exactly by the fit (one per coefficient).
    std::vector<Eigen::Index> basis;
    int pivots = 0;
};

/// Weighted linear quantile regression,
///   argmin_beta sum_i w_i rho_tau(y_i - X_i beta).
///
/// Solved exactly: a first phase builds a basic solution by exact line
/// minimizations along null-space directions, then edge descent moves
/// between basic solutions (each step an exact weighted-median line search)
/// until no edge direction decreases the objective. Single-column designs
/// use the sorted cumulative-weight rule and return the lowest minimizer.
///
/// `warm_basis`, when it holds cols() row indices spanning a nonsingular
/// system, seeds the descent directly (used when sweeping tau).
///
/// Throws DegenerateWeights (all weights zero), SingularDesign (rank
/// deficient on the positively weighted rows), InsufficientData (fewer
/// than cols() + 5 rows) and DomainError (tau outside (0,1), negative weights).
QrFit weighted_linear_qr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double tau,
                         const std::vector<Eigen::Index>* warm_basis = nullptr);

/// Lowest minimizer of sum_i w_i rho_tau(y_i - b).
double weighted_quantile_lower(std::span<const double> y, std::span<const double> w, double tau);

/// QAR(1) upper-quantile forecast: regress L_t on (1, L_{t-1}) at level
/// 1 - alpha_tail and evaluate at the last window value. A window whose
/// predictors are constant reduces to the intercept-only fit.
double qar1_forecast(std::span<const double> window, double alpha_tail);

}  // namespace tailrisk
