#pragma once

#include "tailrisk/backtest.hpp"
#include "tailrisk/garch.hpp"
#include "tailrisk/risk_forecast.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tailrisk {

enum class GammaSpec { Constant, Step, Smooth };

std::string_view to_string(GammaSpec s);
GammaSpec parse_gamma_spec(std::string_view name);

/// Shape constants of the non-constant profiles.
struct GammaProfileParams {
    std::vector<double> step_levels{1.0, 1.5, 0.75};
    std::vector<double> step_breaks{0.4, 0.7};  ///< fractions of n where the next level starts
    double smooth_amplitude = 0.5;
    double smooth_period = 500.0;
};

struct GammaProfile {
    GammaSpec spec = GammaSpec::Constant;
    std::vector<double> values;
};

/// Constant: 1. Step: level k holds from t >= breaks[k-1] n on (zero-based t).
/// Smooth: 1 + A sin(2 pi t / P).
GammaProfile gamma_profile(GammaSpec spec, std::size_t n, const GammaProfileParams& p = {});

struct StudyConfig {
    EgarchParams egarch;
    std::size_t n_obs = 1000;
    std::size_t n_reps = 100;
    std::size_t window = 250;
    std::vector<double> alphas{0.05, 0.01};
    std::vector<ModelId> models{ModelId::Oracle,    ModelId::nGARCH,    ModelId::tGARCH, ModelId::DFGARCH,
                                ModelId::gpdNGARCH, ModelId::gpdTGARCH, ModelId::LLQAR};
    GammaSpec scenario = GammaSpec::Constant;
    GammaProfileParams profile;
    std::uint64_t seed = 1;
    int bootstrap_B = 1000;
    double test_level = 0.05;
    double evt_threshold_prob = 0.90;
    LlqarConfig llqar;
    CaviarOptions caviar;
    unsigned threads = 0;  ///< 0 picks the hardware concurrency

    /// Throws ConfigError on broken invariants.
    void validate() const;
    [[nodiscard]] ForecastConfig forecast_config() const;
};

/// Named presets: "desk" (20 replications) and "full" (100).
StudyConfig study_preset(std::string_view name);

/// Reads a JSON tree whose keys mirror StudyConfig; `preset` selects the
/// starting values. Overrides are dot-path keys (e.g. "llqar.es_sublevels")
/// whose values are parsed as JSON when possible and as strings otherwise.
/// Unknown keys throw ConfigError.
StudyConfig study_config_from_json(std::string_view text,
                                   const std::vector<std::pair<std::string, std::string>>& overrides = {});
std::string study_config_to_json(const StudyConfig& cfg);

struct RepResult {
    std::size_t rep = 0;
    ModelId model = ModelId::nGARCH;
    double alpha = 0.05;
    bool completed = false;
    std::string reason;  ///< why the replication was excluded
    BacktestReport backtest;
    bool uc_reject = false, cc_reject = false, es_reject = false;
    std::size_t carried_forward = 0;
    std::size_t weight_fallback = 0;
    std::size_t window_errors = 0;
    std::size_t es_below_var = 0;
};

struct RejectionRow {
    ModelId model = ModelId::nGARCH;
    double alpha = 0.05;
    std::size_t completed = 0;
    double uc_pct = 0.0, cc_pct = 0.0, es_pct = 0.0;
    double mean_rmse_var = 0.0;
    double mean_rmse_es = 0.0;  ///< NaN for models without ES
    std::size_t nonconverged = 0;  ///< windows with a carried-forward fit, summed over reps
};

struct RegionRow {
    ModelId model = ModelId::nGARCH;
    double alpha = 0.05;
    std::string measure;  ///< "var" or "es"
    int region = 0;
    std::size_t count = 0;
    double truth_low = 0.0, truth_high = 0.0, bias = 0.0, variance = 0.0;
};

struct DiagnosticRow {
    double alpha = 0.05;
    double hall_sheather = 0.0;
    double bofinger = 0.0;
};

struct StudyReport {
    StudyConfig config;
    std::vector<RepResult> reps;  ///< ordered by rep, model, alpha
    std::vector<RejectionRow> rejections;
    std::vector<RegionRow> regions;
    std::vector<DiagnosticRow> diagnostics;
    std::size_t es_below_var = 0;
    std::size_t var_monotonicity_violations = 0;  ///< var at a deeper alpha below var at a shallower one
};

StudyReport run_mc_study(const StudyConfig& cfg);

/// Mean rank (1 = smallest rmse_var) of each model among `models` at `alpha`,
/// over the replications where every listed model completed.
std::map<ModelId, double> mean_rmse_ranks(const StudyReport& report, std::span<const ModelId> models, double alpha);

}  // namespace tailrisk
