#pragma once

#include "tailrisk/caviar.hpp"
#include "tailrisk/evt.hpp"
#include "tailrisk/garch.hpp"
#include "tailrisk/llqar.hpp"
#include "tailrisk/market_data.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tailrisk {

enum class ModelId {
    nGARCH,
    tGARCH,
    DFGARCH,
    gpdNGARCH,
    gpdTGARCH,
    QAR1,
    LLQAR,
    CaviarSAV,
    CaviarAS,
    CaviarIG,
    CaviarAdaptive,
    Oracle,
};

std::string_view to_string(ModelId m);
/// Accepts the names printed by to_string ("CAViaR-SAV" etc.); throws ConfigError.
ModelId parse_model(std::string_view name);
std::vector<ModelId> all_models();

bool has_es(ModelId m);
/// True for the kinds whose records carry a fitted conditional SD.
bool has_sigma(ModelId m);

enum ForecastFlag : unsigned {
    kCarriedForwardFit = 1u,
    kWeightFallback = 2u,
    kWindowError = 4u,  ///< the window could not be forecast; var/es are NaN
};

std::string flags_to_string(unsigned flags);
unsigned parse_flags(std::string_view text);

struct ForecastRecord {
    std::size_t t = 0;  ///< zero-based index of the target loss
    std::string date;
    double loss = 0.0;
    ModelId model = ModelId::nGARCH;
    double alpha = 0.05;
    double var = 0.0;
    std::optional<double> es;
    unsigned flags = 0;
    double sigma = 1.0;  ///< conditional SD used for exceedance residuals (1 when the model has none)
};

struct VarEs {
    double var = 0.0;
    double es = 0.0;
};

VarEs var_es_ngarch(double sigma, double alpha_tail);
VarEs var_es_tgarch(double sigma, double nu, double alpha_tail);
/// Type-7 upper quantile of the residuals; ES is the mean of the ceil(alpha n) largest.
VarEs var_es_dfgarch(double sigma, std::span<const double> std_residuals, double alpha_tail);
VarEs var_es_gpdgarch(double sigma, const GpdFit& f, double alpha_tail);

struct ForecastConfig {
    std::size_t window = 250;
    double evt_threshold_prob = 0.90;
    LlqarConfig llqar;
    CaviarOptions caviar;
    /// Tail levels always present on the LLQAR/QAR quantile ladder.
    std::vector<double> reference_alphas{0.05, 0.01};
};

/// Forecasts every (model, alpha) pair over the rolling windows of `series`.
/// Records come out ordered by model, then alpha (both in argument order),
/// then t. GARCH fits are shared between the models that use the same
/// innovation law. The LLQAR/QAR ladder spans reference_alphas plus the
/// requested alphas, so for alphas taken from reference_alphas the records
/// equal those of separate rolling_forecast calls. `truth` is required for
/// Oracle and must cover the whole series.
std::vector<ForecastRecord> forecast_models(const LogLossSeries& series, std::span<const ModelId> models,
                                            std::span<const double> alphas, const ForecastConfig& cfg,
                                            const SimPath* truth = nullptr);

std::vector<ForecastRecord> rolling_forecast(const LogLossSeries& series, ModelId model, double alpha_tail,
                                             const ForecastConfig& cfg, const SimPath* truth = nullptr);

}  // namespace tailrisk
