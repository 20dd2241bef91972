#include "tailrisk/simstudy.hpp"

#include "tailrisk/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

namespace tailrisk {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json config_tree(const StudyConfig& c) {
    json j;
    j["egarch"] = {{"omega", c.egarch.omega},
                   {"alpha", c.egarch.alpha},
                   {"gamma_coef", c.egarch.gamma_coef},
                   {"beta", c.egarch.beta},
                   {"nu", c.egarch.nu}};
    j["n_obs"] = c.n_obs;
    j["n_reps"] = c.n_reps;
    j["window"] = c.window;
    j["alphas"] = c.alphas;
    std::vector<std::string> models;
    for (ModelId m : c.models) models.emplace_back(to_string(m));
    j["models"] = models;
    j["scenario"] = std::string(to_string(c.scenario));
    j["profile"] = {{"step_levels", c.profile.step_levels},
                    {"step_breaks", c.profile.step_breaks},
                    {"smooth_amplitude", c.profile.smooth_amplitude},
                    {"smooth_period", c.profile.smooth_period}};
    j["seed"] = c.seed;
    j["bootstrap_B"] = c.bootstrap_B;
    j["test_level"] = c.test_level;
    j["evt"] = {{"threshold_prob", c.evt_threshold_prob}};
    j["llqar"] = {{"bandwidth_rule", std::string(to_string(c.llqar.bandwidth_rule))},
                  {"fixed_h", c.llqar.fixed_h ? json(*c.llqar.fixed_h) : json(nullptr)},
                  {"es_sublevels", c.llqar.es_sublevels},
                  {"qcv_grid", c.llqar.qcv_grid}};
    j["caviar"] = {{"starts", c.caviar.starts}, {"G", c.caviar.G}, {"seed", c.caviar.seed}};
    j["threads"] = c.threads;
    return j;
}

void check_known_keys(const json& user, const json& known, const std::string& prefix) {
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (!known.contains(it.key())) throw ConfigError("unknown config key: " + path);
        const json& k = known.at(it.key());
        if (k.is_object()) {
            if (!it.value().is_object()) throw ConfigError("config key " + path + " must be an object");
            check_known_keys(it.value(), k, path);
        }
    }
}

void set_path(json& tree, const std::string& dotted, const json& value) {
    json* node = &tree;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw ConfigError("malformed config key: " + dotted);
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = json::object();
        node = &(*node)[key];
        start = dot + 1;
    }
}

StudyConfig config_from_tree(const json& j) {
    StudyConfig c;
    const json& e = j.at("egarch");
    c.egarch.omega = e.at("omega").get<double>();
    c.egarch.alpha = e.at("alpha").get<double>();
    c.egarch.gamma_coef = e.at("gamma_coef").get<double>();
    c.egarch.beta = e.at("beta").get<double>();
    c.egarch.nu = e.at("nu").get<double>();
    c.n_obs = j.at("n_obs").get<std::size_t>();
    c.n_reps = j.at("n_reps").get<std::size_t>();
    c.window = j.at("window").get<std::size_t>();
    c.alphas = j.at("alphas").get<std::vector<double>>();
    c.models.clear();
    for (const auto& m : j.at("models")) c.models.push_back(parse_model(m.get<std::string>()));
    c.scenario = parse_gamma_spec(j.at("scenario").get<std::string>());
    const json& p = j.at("profile");
    c.profile.step_levels = p.at("step_levels").get<std::vector<double>>();
    c.profile.step_breaks = p.at("step_breaks").get<std::vector<double>>();
    c.profile.smooth_amplitude = p.at("smooth_amplitude").get<double>();
    c.profile.smooth_period = p.at("smooth_period").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.bootstrap_B = j.at("bootstrap_B").get<int>();
    c.test_level = j.at("test_level").get<double>();
    c.evt_threshold_prob = j.at("evt").at("threshold_prob").get<double>();
    const json& l = j.at("llqar");
    c.llqar.bandwidth_rule = parse_bandwidth_rule(l.at("bandwidth_rule").get<std::string>());
    if (!l.at("fixed_h").is_null()) c.llqar.fixed_h = l.at("fixed_h").get<double>();
    c.llqar.es_sublevels = l.at("es_sublevels").get<int>();
    c.llqar.qcv_grid = l.at("qcv_grid").get<std::vector<double>>();
    const json& cv = j.at("caviar");
    c.caviar.starts = cv.at("starts").get<int>();
    c.caviar.G = cv.at("G").get<double>();
    c.caviar.seed = cv.at("seed").get<std::uint64_t>();
    c.threads = j.at("threads").get<unsigned>();
    return c;
}

// Average ranks, 1 for the smallest value.
std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
        i = j + 1;
    }
    return r;
}

struct RepOutput {
    std::vector<RepResult> results;
    // Per stream: forecasts and truth on the usable records, for pooled region errors.
    std::vector<std::vector<double>> f_var, t_var, f_es, t_es;
    std::size_t es_below_var = 0;
    std::size_t monotonicity = 0;
};

RepOutput run_rep(const StudyConfig& cfg, const ForecastConfig& fcfg, const std::vector<double>& gamma,
                  std::size_t rep) {
    const std::size_t n_alpha = cfg.alphas.size();
    const std::size_t n_streams = cfg.models.size() * n_alpha;
    RepOutput out;
    out.f_var.resize(n_streams);
    out.t_var.resize(n_streams);
    out.f_es.resize(n_streams);
    out.t_es.resize(n_streams);

    const auto excluded = [&](const std::string& reason) {
        for (ModelId m : cfg.models)
            for (double a : cfg.alphas) {
                RepResult r;
                r.rep = rep;
                r.model = m;
                r.alpha = a;
                r.reason = reason;
                out.results.push_back(std::move(r));
            }
    };

    SimPath path;
    std::vector<ForecastRecord> records;
    try {
        path = simulate_egarch(cfg.egarch, cfg.n_obs, cfg.seed, gamma, rep);
        LogLossSeries series;
        series.losses = path.losses;
        records = forecast_models(series, cfg.models, cfg.alphas, fcfg, &path);
    } catch (const Error& e) {
        excluded(e.what());
        return out;
    }

    std::vector<std::vector<double>> tv(n_alpha), te(n_alpha);
    for (std::size_t a = 0; a < n_alpha; ++a) std::tie(tv[a], te[a]) = true_var_es(path, cfg.alphas[a]);

    const std::size_t n_win = cfg.n_obs - cfg.window;
    // Alphas from shallow to deep for the monotonicity count.
    std::vector<std::size_t> by_depth(n_alpha);
    std::iota(by_depth.begin(), by_depth.end(), std::size_t{0});
    std::sort(by_depth.begin(), by_depth.end(), [&](std::size_t x, std::size_t y) { return cfg.alphas[x] > cfg.alphas[y]; });

    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
        for (std::size_t k = 0; k < n_win; ++k)
            for (std::size_t d = 1; d < n_alpha; ++d) {
                const auto& shallow = records[(mi * n_alpha + by_depth[d - 1]) * n_win + k];
                const auto& deep = records[(mi * n_alpha + by_depth[d]) * n_win + k];
                if (std::isfinite(shallow.var) && std::isfinite(deep.var) && deep.var < shallow.var) ++out.monotonicity;
            }

        for (std::size_t ai = 0; ai < n_alpha; ++ai) {
            const std::size_t s = mi * n_alpha + ai;
            const std::span<const ForecastRecord> stream(records.data() + s * n_win, n_win);
            RepResult r;
            r.rep = rep;
            r.model = cfg.models[mi];
            r.alpha = cfg.alphas[ai];
            for (const auto& rec : stream) {
                if (rec.flags & kCarriedForwardFit) ++r.carried_forward;
                if (rec.flags & kWeightFallback) ++r.weight_fallback;
                if (rec.flags & kWindowError) {
                    ++r.window_errors;
                    continue;
                }
                if (rec.es && *rec.es < rec.var) ++r.es_below_var;
            }
            out.es_below_var += r.es_below_var;
            if (r.window_errors > 0) {
                r.reason = std::to_string(r.window_errors) + " windows could not be forecast";
            } else {
                try {
                    BacktestOptions bo;
                    bo.bootstrap_B = cfg.bootstrap_B;
                    bo.seed = cfg.seed * 0x9E3779B97F4A7C15ULL + rep * 4096 + s;
                    r.backtest = backtest_stream(stream, bo, &path);
                    r.completed = true;
                    r.uc_reject = r.backtest.uc_p < cfg.test_level;
                    r.cc_reject = r.backtest.cc_p < cfg.test_level;
                    r.es_reject = r.backtest.es_boot_p && *r.backtest.es_boot_p < cfg.test_level;
                    for (const auto& rec : stream) {
                        out.f_var[s].push_back(rec.var);
                        out.t_var[s].push_back(tv[ai][rec.t]);
                        if (rec.es) {
                            out.f_es[s].push_back(*rec.es);
                            out.t_es[s].push_back(te[ai][rec.t]);
                        }
                    }
                } catch (const Error& e) {
                    r.reason = e.what();
                }
            }
            out.results.push_back(std::move(r));
        }
    }
    return out;
}

void append_regions(std::vector<RegionRow>& rows, ModelId m, double alpha, const char* measure, const RegionErrors& e) {
    for (std::size_t b = 0; b < e.count.size(); ++b) {
        RegionRow row;
        row.model = m;
        row.alpha = alpha;
        row.measure = measure;
        row.region = static_cast<int>(b) + 1;
        row.count = e.count[b];
        row.truth_low = e.truth_low[b];
        row.truth_high = e.truth_high[b];
        row.bias = e.bias[b];
        row.variance = e.variance[b];
        rows.push_back(std::move(row));
    }
}

}  // namespace

std::string_view to_string(GammaSpec s) {
    switch (s) {
        case GammaSpec::Constant: return "Constant";
        case GammaSpec::Step: return "Step";
        case GammaSpec::Smooth: return "Smooth";
    }
    return "?";
}

GammaSpec parse_gamma_spec(std::string_view name) {
    if (name == "Constant" || name == "constant") return GammaSpec::Constant;
    if (name == "Step" || name == "step") return GammaSpec::Step;
    if (name == "Smooth" || name == "smooth") return GammaSpec::Smooth;
    throw ConfigError("unknown scenario: " + std::string(name));
}

GammaProfile gamma_profile(GammaSpec spec, std::size_t n, const GammaProfileParams& p) {
    if (n < 1) throw DomainError("gamma profile needs n >= 1");
    GammaProfile g;
    g.spec = spec;
    g.values.assign(n, 1.0);
    switch (spec) {
        case GammaSpec::Constant: break;
        case GammaSpec::Step: {
            if (p.step_levels.size() != p.step_breaks.size() + 1) throw ConfigError("step profile needs one more level than breaks");
            for (std::size_t t = 0; t < n; ++t) {
                std::size_t k = 0;
                while (k < p.step_breaks.size() && static_cast<double>(t) >= p.step_breaks[k] * static_cast<double>(n)) ++k;
                g.values[t] = p.step_levels[k];
            }
            break;
        }
        case GammaSpec::Smooth:
            for (std::size_t t = 0; t < n; ++t)
                g.values[t] = 1.0 + p.smooth_amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / p.smooth_period);
            break;
    }
    for (double v : g.values)
        if (!(v > 0.0)) throw ConfigError("gamma profile values must be positive");
    return g;
}

void StudyConfig::validate() const {
    if (!(n_obs > window)) throw ConfigError("n_obs must exceed window");
    if (window < 100) throw ConfigError("window must be at least 100");
    if (n_reps < 1) throw ConfigError("n_reps must be at least 1");
    if (alphas.empty()) throw ConfigError("alphas is empty");
    for (double a : alphas)
        if (!(a > 0.0 && a < 0.5)) throw ConfigError("alphas must lie in (0, 0.5)");
    if (models.empty()) throw ConfigError("models is empty");
    if (bootstrap_B < 200) throw ConfigError("bootstrap_B must be at least 200");
    if (!(test_level > 0.0 && test_level < 1.0)) throw ConfigError("test_level must lie in (0, 1)");
    if (!(evt_threshold_prob > 0.5 && evt_threshold_prob < 1.0)) throw ConfigError("evt.threshold_prob must lie in (0.5, 1)");
    if (!(egarch.nu > 2.0)) throw ConfigError("egarch.nu must exceed 2");
    if (!(std::abs(egarch.beta) < 1.0)) throw ConfigError("egarch.beta must lie in (-1, 1)");
    if (caviar.starts < 0 || !(caviar.G > 0.0)) throw ConfigError("caviar.starts must be >= 0 and caviar.G > 0");
    llqar.validate();
    gamma_profile(scenario, n_obs, profile);
}

ForecastConfig StudyConfig::forecast_config() const {
    ForecastConfig f;
    f.window = window;
    f.evt_threshold_prob = evt_threshold_prob;
    f.llqar = llqar;
    f.caviar = caviar;
    return f;
}

StudyConfig study_preset(std::string_view name) {
    StudyConfig c;
    if (name == "desk") c.n_reps = 20;
    else if (name == "full") c.n_reps = 100;
    else throw ConfigError("unknown preset: " + std::string(name));
    return c;
}

StudyConfig study_config_from_json(std::string_view text,
                                   const std::vector<std::pair<std::string, std::string>>& overrides) {
    json user = json::object();
    try {
        const bool blank = std::all_of(text.begin(), text.end(), [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); });
        if (!blank) user = json::parse(text);
        if (!user.is_object()) throw ConfigError("config must be a JSON object");
        for (const auto& [key, raw] : overrides) {
            json value;
            try {
                value = json::parse(raw);
            } catch (const json::exception&) {
                value = raw;
            }
            set_path(user, key, value);
        }

        std::string preset = "full";
        if (user.contains("preset")) {
            preset = user.at("preset").get<std::string>();
            user.erase("preset");
        }
        json tree = config_tree(study_preset(preset));
        check_known_keys(user, tree, "");
        tree.merge_patch(user);
        // merge_patch drops keys patched with null; restore the optional one.
        if (!tree["llqar"].contains("fixed_h")) tree["llqar"]["fixed_h"] = nullptr;
        StudyConfig cfg = config_from_tree(tree);
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

std::string study_config_to_json(const StudyConfig& cfg) { return config_tree(cfg).dump(2); }

StudyReport run_mc_study(const StudyConfig& cfg) {
    cfg.validate();
    const ForecastConfig fcfg = cfg.forecast_config();
    const std::vector<double> gamma = gamma_profile(cfg.scenario, cfg.n_obs, cfg.profile).values;

    std::vector<RepOutput> outputs(cfg.n_reps);
    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.n_reps));
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t rep = next++; rep < cfg.n_reps; rep = next++) outputs[rep] = run_rep(cfg, fcfg, gamma, rep);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }

    StudyReport report;
    report.config = cfg;
    const std::size_t n_alpha = cfg.alphas.size();
    const std::size_t n_streams = cfg.models.size() * n_alpha;
    std::vector<std::vector<double>> f_var(n_streams), t_var(n_streams), f_es(n_streams), t_es(n_streams);
    for (auto& o : outputs) {
        report.es_below_var += o.es_below_var;
        report.var_monotonicity_violations += o.monotonicity;
        for (auto& r : o.results) report.reps.push_back(std::move(r));
        for (std::size_t s = 0; s < n_streams; ++s) {
            f_var[s].insert(f_var[s].end(), o.f_var[s].begin(), o.f_var[s].end());
            t_var[s].insert(t_var[s].end(), o.t_var[s].begin(), o.t_var[s].end());
            f_es[s].insert(f_es[s].end(), o.f_es[s].begin(), o.f_es[s].end());
            t_es[s].insert(t_es[s].end(), o.t_es[s].begin(), o.t_es[s].end());
        }
    }

    for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
        for (std::size_t ai = 0; ai < n_alpha; ++ai) {
            const std::size_t s = mi * n_alpha + ai;
            RejectionRow row;
            row.model = cfg.models[mi];
            row.alpha = cfg.alphas[ai];
            std::size_t uc = 0, cc = 0, es = 0;
            double sum_var = 0.0, sum_es = 0.0;
            for (const auto& r : report.reps) {
                if (r.model != row.model || r.alpha != row.alpha) continue;
                row.nonconverged += r.carried_forward;
                if (!r.completed) continue;
                ++row.completed;
                uc += r.uc_reject;
                cc += r.cc_reject;
                es += r.es_reject;
                sum_var += r.backtest.rmse_var.value_or(kNaN);
                sum_es += r.backtest.rmse_es.value_or(kNaN);
            }
            const double denom = static_cast<double>(row.completed);
            row.uc_pct = row.completed ? 100.0 * static_cast<double>(uc) / denom : kNaN;
            row.cc_pct = row.completed ? 100.0 * static_cast<double>(cc) / denom : kNaN;
            row.es_pct = row.completed && has_es(row.model) ? 100.0 * static_cast<double>(es) / denom : kNaN;
            row.mean_rmse_var = row.completed ? sum_var / denom : kNaN;
            row.mean_rmse_es = row.completed && has_es(row.model) ? sum_es / denom : kNaN;
            report.rejections.push_back(row);

            if (f_var[s].size() >= 5) append_regions(report.regions, row.model, row.alpha, "var", region_errors(f_var[s], t_var[s]));
            if (f_es[s].size() >= 5) append_regions(report.regions, row.model, row.alpha, "es", region_errors(f_es[s], t_es[s]));
        }
    }

    for (double a : cfg.alphas)
        report.diagnostics.push_back(
            {a, hall_sheather_bandwidth(cfg.window - 1, 1.0 - a), bofinger_bandwidth(cfg.window - 1, 1.0 - a)});
    return report;
}

std::map<ModelId, double> mean_rmse_ranks(const StudyReport& report, std::span<const ModelId> models, double alpha) {
    std::map<std::size_t, std::vector<double>> by_rep;
    std::map<std::size_t, std::size_t> found;
    for (const auto& r : report.reps) {
        if (r.alpha != alpha) continue;
        const auto it = std::find(models.begin(), models.end(), r.model);
        if (it == models.end()) continue;
        auto& v = by_rep[r.rep];
        v.resize(models.size(), kNaN);
        if (r.completed && r.backtest.rmse_var) {
            v[static_cast<std::size_t>(it - models.begin())] = *r.backtest.rmse_var;
            ++found[r.rep];
        }
    }
    std::map<ModelId, double> mean;
    std::size_t used = 0;
    for (const auto& [rep, v] : by_rep) {
        if (found[rep] != models.size()) continue;
        const auto rk = ranks(v);
        for (std::size_t i = 0; i < models.size(); ++i) mean[models[i]] += rk[i];
        ++used;
    }
    if (used == 0) throw InsufficientData("no replication where every model completed");
    for (auto& [m, v] : mean) v /= static_cast<double>(used);
    return mean;
}

}  // namespace tailrisk
