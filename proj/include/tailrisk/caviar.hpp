#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tailrisk {

enum class CaviarSpec { SAV, AS, IndirectGarch, Adaptive };

std::string_view to_string(CaviarSpec spec);
std::size_t caviar_param_count(CaviarSpec spec);

struct CaviarOptions {
    int starts = 25;           ///< random starts in addition to the constant-quantile start
    double G = 10.0;           ///< Adaptive smoothing, applied on the window-standardized scale
    std::uint64_t seed = 12345;
};

/// Fitted recursion for the upper (1 - alpha) quantile of losses:
///   SAV:       Q_t = b1 + b2 Q_{t-1} + b3 |y_{t-1}|
///   AS:        Q_t = b1 + b2 Q_{t-1} + b3 max(y_{t-1}, 0) - b4 min(y_{t-1}, 0)
///   IG:        Q_t = sqrt(b1 + b2 Q_{t-1}^2 + b3 y_{t-1}^2)
///   Adaptive:  Q_t = Q_{t-1} + b1 ([1 + exp(G (y_{t-1} - Q_{t-1}))]^{-1} - (1 - alpha))
/// Coefficients are stored on the raw loss scale.
struct CaviarFit {
    CaviarSpec spec = CaviarSpec::SAV;
    std::vector<double> beta;
    double G = 0.0;  ///< Adaptive only, raw-scale value
    double alpha_tail = 0.05;
    std::vector<double> quantile_path;
    double objective = 0.0;
};

/// One step of the recursion. Returns NaN for a negative IG radicand.
double caviar_step(CaviarSpec spec, std::span<const double> beta, double G, double alpha_tail, double q_prev,
                   double y_prev);

/// Runs the recursion over `window` with Q_1 = q1. Returns false if the
/// path leaves the valid region (non-finite or negative IG radicand).
bool caviar_path(CaviarSpec spec, std::span<const double> beta, double G, double alpha_tail, double q1,
                 std::span<const double> window, std::vector<double>& path);

/// Multi-start Nelder-Mead minimization of the check loss. Throws FitError
/// when no start converges.
CaviarFit caviar_fit(std::span<const double> window, CaviarSpec spec, double alpha_tail,
                     const CaviarOptions& opt = {});

/// One further recursion step; throws ForecastError on a negative IG radicand.
double caviar_forecast(const CaviarFit& fit, double last_loss);

}  // namespace tailrisk
