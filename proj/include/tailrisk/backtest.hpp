#pragma once

#include "tailrisk/risk_forecast.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace tailrisk {

struct ViolationSeries {
    std::vector<unsigned char> indicators;  ///< loss_t > var_t
    std::size_t x = 0;
    std::size_t n = 0;
};

ViolationSeries violations(std::span<const double> losses, std::span<const double> var);

struct LrTest {
    double lr = 0.0;
    double p = 1.0;
};

/// Kupiec proportion-of-failures test against chi-squared(1).
LrTest kupiec_uc(std::size_t x, std::size_t n, double alpha_tail);

/// Christoffersen conditional coverage, LR_uc + LR_ind against chi-squared(2).
LrTest christoffersen_cc(const ViolationSeries& v, double alpha_tail);

/// (loss - es) / sigma at the violation times only.
std::vector<double> exceedance_residuals(std::span<const double> losses, std::span<const double> var,
                                         std::span<const double> es, std::span<const double> sigma);

/// One-sided bootstrap test of zero mean against mean > 0 with the
/// studentized mean, resampling the centered residuals B times.
double es_bootstrap_test(std::span<const double> r, int B, std::uint64_t seed);

struct VMeasure {
    double v1 = 0.0;  ///< mean of es - var over violations
    double v2 = 0.0;  ///< mean of loss - var over violations
    double v = 0.0;
};

VMeasure v_measure(std::span<const double> losses, std::span<const double> var, std::span<const double> es);

double rmse(std::span<const double> forecast, std::span<const double> truth);

struct RegionErrors {
    std::vector<std::size_t> count;
    std::vector<double> truth_low, truth_high;  ///< truth range covered by each bin
    std::vector<double> bias;                   ///< mean forecast - truth
    std::vector<double> variance;               ///< sample variance of the error (NaN under two points)
};

/// Equal-count bins ordered by truth. Ties at a boundary go to the lower bin.
RegionErrors region_errors(std::span<const double> forecast, std::span<const double> truth, int regions = 5);

struct RegionErrorSummary {
    RegionErrors var;
    std::optional<RegionErrors> es;
};

struct BacktestReport {
    ModelId model = ModelId::nGARCH;
    double alpha = 0.05;
    std::size_t n = 0;
    std::size_t x = 0;
    double prop = 0.0;
    double uc_lr = 0.0, uc_p = 1.0;
    double cc_lr = 0.0, cc_p = 1.0;
    std::optional<double> es_boot_p;
    std::optional<double> v1, v2, v;
    std::optional<double> rmse_var, rmse_es;
    std::size_t skipped = 0;  ///< records dropped for window errors
};

struct BacktestOptions {
    int bootstrap_B = 1000;
    std::uint64_t seed = 20240611;
};

/// Backtests one (model, alpha) stream. Records flagged with a window error
/// are left out. With `truth` the RMSE against the simulated conditional
/// VaR/ES is filled in.
BacktestReport backtest_stream(std::span<const ForecastRecord> records, const BacktestOptions& opt,
                               const SimPath* truth = nullptr);

/// Splits records into (model, alpha) streams in order of first appearance.
std::vector<std::vector<ForecastRecord>> group_streams(std::span<const ForecastRecord> records);

std::vector<BacktestReport> backtest_all(std::span<const ForecastRecord> records, const BacktestOptions& opt,
                                         const SimPath* truth = nullptr);

}  // namespace tailrisk
