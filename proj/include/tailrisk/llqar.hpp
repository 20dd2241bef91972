#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace tailrisk {

// Local linear quantile autoregression.
//
// For a window L_1..L_W and current loss L = L_W, each lagged pair
// (predictor L_{i-1}, response L_i), i = 2..W, gets the scaled distance
//
//     u_i = (L_{i-1} - L) * lag_i / (W - 1),   lag_i = W - i + 1,
//
// and Gaussian kernel weight K(u_i / h). Past losses of similar size get
// more weight, and for a fixed loss distance the weight decays with lag.
// The VaR forecast is the intercept of the weighted linear quantile
// regression of L_i on (1, L_{i-1} - L) at level 1 - alpha.

enum class BandwidthRule { RuleOfThumbIQR, QCV, Fixed };

std::string_view to_string(BandwidthRule rule);
BandwidthRule parse_bandwidth_rule(std::string_view name);

struct LlqarConfig {
    BandwidthRule bandwidth_rule = BandwidthRule::RuleOfThumbIQR;
    std::optional<double> fixed_h;
    int es_sublevels = 20;
    std::vector<double> qcv_grid = default_qcv_grid();

    static std::vector<double> default_qcv_grid();
    /// Throws ConfigError when the invariants do not hold.
    void validate() const;
};

struct LlqarWeights {
    std::vector<double> u;
    std::vector<double> w;
    double h = 0.0;
};

/// Scaled distances for the W - 1 predictor/response pairs of `window`,
/// oldest pair first. Needs W >= 2.
std::vector<double> llqar_scaled_distances(std::span<const double> window, double L);

LlqarWeights llqar_weights(std::span<const double> window, double h);

/// (4 / (3n))^(1/5) * IQR(|u|) with type-7 quartiles. Falls back to
/// 0.1 * max|u| when the IQR vanishes; throws DegenerateBandwidth if that is 0 too.
double rot_bandwidth(std::span<const double> u);

struct QcvResult {
    double q_opt = 0.0;
    double h = 0.0;
    std::vector<double> grid;
    std::vector<double> cv;  ///< summed leave-one-out check loss per grid point (inf if degenerate)
};

/// Leave-one-out cross-validation over quantiles of |u| on a single window.
QcvResult qcv_bandwidth(std::span<const double> window, double alpha_tail, std::span<const double> grid);

/// Raw local linear quantile forecast at tail probability alpha_tail.
/// Throws DegenerateWeights when the kernel weights sum below 1e-12.
double llqar_var(std::span<const double> window, double alpha_tail, double h);

/// Tail levels alpha (j - 1/2) / K, j = 1..K.
std::vector<double> es_sublevels(double alpha_tail, int K);

/// Quantile forecasts on a ladder of tail levels sorted from shallow to deep,
/// made monotone by a running maximum (deeper levels never forecast less).
struct LlqarCurve {
    std::vector<double> levels;    ///< descending tail probabilities
    std::vector<double> raw;
    std::vector<double> repaired;
    bool weight_fallback = false;
    int crossings = 0;  ///< levels the repair had to lift
};

/// Underflowing weights fall back to the unweighted QAR(1) fit and set weight_fallback.
LlqarCurve llqar_curve(std::span<const double> window, std::span<const double> levels, double h);

/// ES as the mean of the repaired quantiles at the K midpoint sublevels,
/// repaired against the VaR at alpha_tail itself.
double llqar_es(std::span<const double> window, double alpha_tail, double h, int K);

struct LlqarForecast {
    double var = 0.0;
    double es = 0.0;
    bool weight_fallback = false;
};

/// alpha and its K sublevels for every entry of `alphas`.
std::vector<double> llqar_ladder(std::span<const double> alphas, int K);

/// VaR at alpha_tail and ES over its K sublevels; both must be on the ladder.
LlqarForecast llqar_read(const LlqarCurve& curve, double alpha_tail, int K);

/// VaR and ES read from one repaired curve whose ladder covers alpha_tail and
/// every `reference_alphas` level together with their ES sublevels, so that
/// forecasts at different alphas are mutually consistent.
LlqarForecast llqar_forecast(std::span<const double> window, double alpha_tail, double h, int K,
                             std::span<const double> reference_alphas);

/// Reference bandwidths for quantile smoothing (diagnostics only).
double hall_sheather_bandwidth(std::size_t n, double tau);
double bofinger_bandwidth(std::size_t n, double tau);
double yu_jones_bandwidth(double h_mean, double tau);

}  // namespace tailrisk
