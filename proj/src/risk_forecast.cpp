#include "tailrisk/risk_forecast.hpp"

#include "tailrisk/dist.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/quantreg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace tailrisk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ModelName {
    ModelId id;
    std::string_view name;
};

constexpr std::array<ModelName, 12> kModelNames{{
    {ModelId::nGARCH, "nGARCH"},
    {ModelId::tGARCH, "tGARCH"},
    {ModelId::DFGARCH, "DFGARCH"},
    {ModelId::gpdNGARCH, "gpdNGARCH"},
    {ModelId::gpdTGARCH, "gpdTGARCH"},
    {ModelId::QAR1, "QAR1"},
    {ModelId::LLQAR, "LLQAR"},
    {ModelId::CaviarSAV, "CAViaR-SAV"},
    {ModelId::CaviarAS, "CAViaR-AS"},
    {ModelId::CaviarIG, "CAViaR-IG"},
    {ModelId::CaviarAdaptive, "CAViaR-Adaptive"},
    {ModelId::Oracle, "Oracle"},
}};

constexpr std::array<std::pair<unsigned, std::string_view>, 3> kFlagNames{{
    {kCarriedForwardFit, "carried-forward-fit"},
    {kWeightFallback, "weight-fallback"},
    {kWindowError, "window-error"},
}};

bool is_caviar(ModelId m) {
    return m == ModelId::CaviarSAV || m == ModelId::CaviarAS || m == ModelId::CaviarIG || m == ModelId::CaviarAdaptive;
}

CaviarSpec caviar_spec(ModelId m) {
    switch (m) {
        case ModelId::CaviarAS: return CaviarSpec::AS;
        case ModelId::CaviarIG: return CaviarSpec::IndirectGarch;
        case ModelId::CaviarAdaptive: return CaviarSpec::Adaptive;
        default: return CaviarSpec::SAV;
    }
}

void check_alpha(double a) {
    if (!(a > 0.0 && a < 0.5)) throw DomainError("alpha_tail must lie in (0, 0.5)");
}

double mean_of(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

double sd_or_one(std::span<const double> x) {
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    return sd > 0.0 ? sd : 1.0;
}

// One GARCH fit per window, shared by every model with the same innovation law.
class GarchStream {
public:
    explicit GarchStream(DistKind kind) : kind_(kind) {}

    void update(std::span<const double> w) {
        fit_.reset();
        tail_.reset();
        tail_error_ = false;
        flags_ = 0;
        try {
            fit_ = fit_garch(w, kind_);
            prev_ = fit_->params;
        } catch (const FitError& e) {
            flags_ |= kCarriedForwardFit;
            GarchParams p;
            if (prev_) {
                p = *prev_;
            } else {
                const auto& b = e.best();
                p.omega = b.at(0);
                p.alpha = b.at(1);
                p.beta = b.at(2);
                if (b.size() > 3) p.nu = b[3];
                prev_ = p;
            }
            p.mu = mean_of(w);
            try {
                fit_ = filter_garch(w, p);
                fit_->converged = false;
            } catch (const Error&) {
                fit_.reset();
            }
        } catch (const Error&) {
            fit_.reset();
        }
        if (fit_) sigma_ = forecast_sigma(*fit_, w.back());
    }

    [[nodiscard]] bool ok() const { return fit_.has_value() && std::isfinite(sigma_) && sigma_ > 0.0; }
    [[nodiscard]] const FittedGarch& fit() const { return *fit_; }
    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] unsigned flags() const { return flags_; }

    const GpdFit* tail(double p_u) {
        if (!tail_ && !tail_error_) {
            try {
                tail_ = fit_tail(fit_->std_residuals, p_u);
            } catch (const Error&) {
                tail_error_ = true;
            }
        }
        return tail_ ? &*tail_ : nullptr;
    }

private:
    DistKind kind_;
    std::optional<GarchParams> prev_;
    std::optional<FittedGarch> fit_;
    std::optional<GpdFit> tail_;
    bool tail_error_ = false;
    double sigma_ = kNaN;
    unsigned flags_ = 0;
};

struct CaviarState {
    std::optional<CaviarFit> prev;
};

// Fit, or fall back to the last good coefficients (best-found on the first window).
double caviar_window(std::span<const double> w, CaviarSpec spec, double alpha, const CaviarOptions& opt,
                     CaviarState& state, unsigned& flags) {
    try {
        CaviarFit fit = caviar_fit(w, spec, alpha, opt);
        const double q = caviar_forecast(fit, w.back());
        state.prev = std::move(fit);
        return q;
    } catch (const FitError& e) {
        flags |= kCarriedForwardFit;
        CaviarFit fit;
        if (state.prev) {
            fit = *state.prev;
        } else {
            fit.spec = spec;
            fit.alpha_tail = alpha;
            fit.beta = e.best();
            fit.G = spec == CaviarSpec::Adaptive ? opt.G / sd_or_one(w) : 0.0;
            state.prev = fit;
        }
        if (!caviar_path(spec, fit.beta, fit.G, alpha, quantile_type7(w, 1.0 - alpha), w, fit.quantile_path))
            throw ForecastError("carried-forward CAViaR path is invalid");
        return caviar_forecast(fit, w.back());
    }
}

}  // namespace

std::string_view to_string(ModelId m) {
    for (const auto& [id, name] : kModelNames)
        if (id == m) return name;
    return "?";
}

ModelId parse_model(std::string_view name) {
    for (const auto& [id, n] : kModelNames)
        if (n == name) return id;
    throw ConfigError("unknown model: " + std::string(name));
}

std::vector<ModelId> all_models() {
    std::vector<ModelId> out;
    for (const auto& [id, name] : kModelNames) out.push_back(id);
    return out;
}

bool has_es(ModelId m) { return !is_caviar(m); }

bool has_sigma(ModelId m) {
    switch (m) {
        case ModelId::nGARCH:
        case ModelId::tGARCH:
        case ModelId::DFGARCH:
        case ModelId::gpdNGARCH:
        case ModelId::gpdTGARCH:
        case ModelId::Oracle: return true;
        default: return false;
    }
}

std::string flags_to_string(unsigned flags) {
    std::string out;
    for (const auto& [bit, name] : kFlagNames) {
        if (!(flags & bit)) continue;
        if (!out.empty()) out += '|';
        out += name;
    }
    return out;
}

unsigned parse_flags(std::string_view text) {
    unsigned flags = 0;
    while (!text.empty()) {
        const auto bar = text.find('|');
        const std::string_view item = text.substr(0, bar);
        bool known = false;
        for (const auto& [bit, name] : kFlagNames)
            if (name == item) {
                flags |= bit;
                known = true;
            }
        if (!known) throw ParseError(0, "unknown forecast flag: " + std::string(item));
        if (bar == std::string_view::npos) break;
        text.remove_prefix(bar + 1);
    }
    return flags;
}

VarEs var_es_ngarch(double sigma, double alpha_tail) {
    check_alpha(alpha_tail);
    const Dist N = Dist::normal();
    const double q = quantile(N, 1.0 - alpha_tail);
    return {sigma * q, sigma * pdf(N, q) / alpha_tail};
}

VarEs var_es_tgarch(double sigma, double nu, double alpha_tail) {
    check_alpha(alpha_tail);
    if (!(nu > 2.0)) throw DomainError("nu must exceed 2");
    const auto [q, es] = standardized_t_var_es(nu, alpha_tail);
    return {sigma * q, sigma * es};
}

VarEs var_es_dfgarch(double sigma, std::span<const double> std_residuals, double alpha_tail) {
    check_alpha(alpha_tail);
    const double n = static_cast<double>(std_residuals.size());
    if (std_residuals.empty() || n < 1.0 / alpha_tail) throw InsufficientData("DFGARCH needs at least 1/alpha residuals");
    std::vector<double> r(std_residuals.begin(), std_residuals.end());
    std::sort(r.begin(), r.end());
    const double q = quantile_type7_sorted(r, 1.0 - alpha_tail);
    const auto k = static_cast<std::size_t>(std::ceil(alpha_tail * n - 1e-9));
    double excess = 0.0;
    for (auto it = r.end() - static_cast<std::ptrdiff_t>(k); it != r.end(); ++it) excess += *it - q;
    const double tail = q + excess / static_cast<double>(k);
    return {sigma * q, sigma * tail};
}

VarEs var_es_gpdgarch(double sigma, const GpdFit& f, double alpha_tail) {
    check_alpha(alpha_tail);
    const double q = gpd_tail_quantile(f, alpha_tail);
    return {sigma * q, sigma * gpd_tail_es(f, q)};
}

std::vector<ForecastRecord> forecast_models(const LogLossSeries& series, std::span<const ModelId> models,
                                            std::span<const double> alphas, const ForecastConfig& cfg,
                                            const SimPath* truth) {
    const std::size_t W = cfg.window;
    const std::size_t N = series.size();
    if (W < 30) throw DomainError("window must be at least 30");
    if (N <= W) throw InsufficientData("series must be longer than the window");
    if (models.empty() || alphas.empty()) throw DomainError("no models or alphas requested");
    for (double a : alphas) check_alpha(a);
    cfg.llqar.validate();
    for (ModelId m : models)
        if (m == ModelId::Oracle && (!truth || truth->sigma_true.size() != N))
            throw NotApplicable("Oracle needs the simulated path that generated the series");

    const auto uses = [&](std::initializer_list<ModelId> ids) {
        return std::any_of(models.begin(), models.end(),
                           [&](ModelId m) { return std::find(ids.begin(), ids.end(), m) != ids.end(); });
    };
    const bool need_n = uses({ModelId::nGARCH, ModelId::DFGARCH, ModelId::gpdNGARCH});
    const bool need_t = uses({ModelId::tGARCH, ModelId::gpdTGARCH});
    const bool need_ladder = uses({ModelId::QAR1, ModelId::LLQAR});

    std::vector<double> ladder_alphas = cfg.reference_alphas;
    ladder_alphas.insert(ladder_alphas.end(), alphas.begin(), alphas.end());
    const int K = cfg.llqar.es_sublevels;
    const std::vector<double> ladder = need_ladder ? llqar_ladder(ladder_alphas, K) : std::vector<double>{};

    std::vector<std::vector<double>> true_var(alphas.size()), true_es(alphas.size());
    if (uses({ModelId::Oracle}))
        for (std::size_t a = 0; a < alphas.size(); ++a) std::tie(true_var[a], true_es[a]) = true_var_es(*truth, alphas[a]);

    const std::size_t n_win = N - W;
    const std::size_t n_streams = models.size() * alphas.size();
    std::vector<std::vector<ForecastRecord>> out(n_streams);
    for (auto& s : out) s.reserve(n_win);

    GarchStream gn(DistKind::StandardNormal), gt(DistKind::StandardizedT);
    std::vector<CaviarState> caviar(n_streams);
    std::vector<double> qcv_h(alphas.size(), kNaN);
    const std::span<const double> losses(series.losses);

    for (std::size_t k = 0; k < n_win; ++k) {
        const std::span<const double> w = losses.subspan(k, W);
        const std::size_t target = k + W;
        if (need_n) gn.update(w);
        if (need_t) gt.update(w);

        // LLQAR/QAR curves, built lazily and shared across alphas when the bandwidth allows.
        std::optional<LlqarCurve> qar_curve;
        std::map<double, LlqarCurve> llqar_curves;
        const auto llqar_bandwidth = [&](std::size_t ai) {
            switch (cfg.llqar.bandwidth_rule) {
                case BandwidthRule::Fixed: return *cfg.llqar.fixed_h;
                case BandwidthRule::QCV:
                    if (std::isnan(qcv_h[ai])) qcv_h[ai] = qcv_bandwidth(w, alphas[ai], cfg.llqar.qcv_grid).h;
                    return qcv_h[ai];
                case BandwidthRule::RuleOfThumbIQR: break;
            }
            return rot_bandwidth(llqar_scaled_distances(w, w.back()));
        };

        for (std::size_t mi = 0; mi < models.size(); ++mi) {
            const ModelId m = models[mi];
            for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
                const double a = alphas[ai];
                ForecastRecord rec;
                rec.t = target;
                rec.date = target < series.dates.size() ? series.dates[target] : std::string{};
                rec.loss = losses[target];
                rec.model = m;
                rec.alpha = a;
                try {
                    VarEs v{};
                    switch (m) {
                        case ModelId::nGARCH:
                        case ModelId::DFGARCH:
                        case ModelId::gpdNGARCH:
                        case ModelId::tGARCH:
                        case ModelId::gpdTGARCH: {
                            const bool normal = m == ModelId::nGARCH || m == ModelId::DFGARCH || m == ModelId::gpdNGARCH;
                            GarchStream& g = normal ? gn : gt;
                            rec.flags |= g.flags();
                            if (!g.ok()) throw ForecastError("no usable GARCH fit for this window");
                            rec.sigma = g.sigma();
                            if (m == ModelId::nGARCH) v = var_es_ngarch(g.sigma(), a);
                            else if (m == ModelId::tGARCH) v = var_es_tgarch(g.sigma(), *g.fit().params.nu, a);
                            else if (m == ModelId::DFGARCH) v = var_es_dfgarch(g.sigma(), g.fit().std_residuals, a);
                            else {
                                const GpdFit* tail = g.tail(cfg.evt_threshold_prob);
                                if (!tail) throw TailError("GPD tail fit failed for this window");
                                v = var_es_gpdgarch(g.sigma(), *tail, a);
                            }
                            rec.var = v.var;
                            rec.es = v.es;
                            break;
                        }
                        case ModelId::QAR1:
                        case ModelId::LLQAR: {
                            const LlqarCurve* c = nullptr;
                            if (m == ModelId::QAR1) {
                                if (!qar_curve) qar_curve = llqar_curve(w, ladder, std::numeric_limits<double>::infinity());
                                c = &*qar_curve;
                            } else {
                                const double h = llqar_bandwidth(ai);
                                auto it = llqar_curves.find(h);
                                if (it == llqar_curves.end()) it = llqar_curves.emplace(h, llqar_curve(w, ladder, h)).first;
                                c = &it->second;
                            }
                            const LlqarForecast f = llqar_read(*c, a, K);
                            rec.var = f.var;
                            rec.es = f.es;
                            if (f.weight_fallback) rec.flags |= kWeightFallback;
                            break;
                        }
                        case ModelId::Oracle:
                            rec.var = true_var[ai][target];
                            rec.es = true_es[ai][target];
                            rec.sigma = truth->sigma_true[target];
                            break;
                        default:
                            rec.var = caviar_window(w, caviar_spec(m), a, cfg.caviar, caviar[mi * alphas.size() + ai],
                                                    rec.flags);
                            break;
                    }
                    if (!std::isfinite(rec.var) || (rec.es && !std::isfinite(*rec.es)))
                        throw ForecastError("non-finite forecast");
                } catch (const Error&) {
                    rec.flags |= kWindowError;
                    rec.var = kNaN;
                    if (has_es(m)) rec.es = kNaN;
                    else rec.es.reset();
                }
                out[mi * alphas.size() + ai].push_back(std::move(rec));
            }
        }
    }

    std::vector<ForecastRecord> flat;
    flat.reserve(n_streams * n_win);
    for (auto& s : out) std::move(s.begin(), s.end(), std::back_inserter(flat));
    return flat;
}

std::vector<ForecastRecord> rolling_forecast(const LogLossSeries& series, ModelId model, double alpha_tail,
                                             const ForecastConfig& cfg, const SimPath* truth) {
    const std::array<ModelId, 1> m{model};
    const std::array<double, 1> a{alpha_tail};
    return forecast_models(series, m, a, cfg, truth);
}

}  // namespace tailrisk
