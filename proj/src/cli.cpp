#include "tailrisk/cli.hpp"

#include "tailrisk/backtest.hpp"
#include "tailrisk/csv_io.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/market_data.hpp"
#include "tailrisk/risk_forecast.hpp"
#include "tailrisk/simstudy.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace tailrisk {

namespace {

// Raised for bad files or flags the user can fix.
struct UsageError : Error {
    using Error::Error;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> parse_alphas(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("bad alpha: " + item);
        }
    }
    if (out.empty()) throw UsageError("no alpha given");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(0, "cannot open " + path);
    return in;
}

// Writes to `path`, or to `out` when path is "-".
template <class F>
void emit(const std::string& path, std::ostream& out, F&& write) {
    if (path == "-") {
        write(out);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParseError(0, "cannot write " + path);
    write(f);
    if (!f) throw ParseError(0, "write failed for " + path);
}

int classify(const Error& e) {
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const OrderError*>(&e) ||
        dynamic_cast<const InsufficientData*>(&e) || dynamic_cast<const AlignmentError*>(&e) ||
        dynamic_cast<const NotApplicable*>(&e))
        return kExitData;
    return kExitNumerical;
}

std::string describe(const Error& e) {
    if (const auto* p = dynamic_cast<const ParseError*>(&e); p && p->row() > 0)
        return "row " + std::to_string(p->row()) + ": " + e.what();
    if (const auto* o = dynamic_cast<const OrderError*>(&e)) return "row " + std::to_string(o->row()) + ": " + e.what();
    return e.what();
}

struct ReportRow {
    std::size_t records = 0;
    std::size_t window_errors = 0;
    double sum_var = 0.0, sum_es = 0.0;
    std::size_t n_es = 0;
};

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tail risk forecasting and backtesting toolkit", "tailrisk"};
    app.require_subcommand(1);

    std::string prices_path, losses_out = "losses.csv", summary_out = "summary.csv";
    auto* ingest = app.add_subcommand("ingest", "Prices CSV to log losses and summary statistics");
    ingest->add_option("prices", prices_path, "CSV with header date,close")->required();
    ingest->add_option("--losses", losses_out, "losses output (- for stdout)");
    ingest->add_option("--summary", summary_out, "summary statistics output (- for stdout)");

    std::string losses_path, model_list = "nGARCH", alpha_list = "0.05", truth_path, out_path = "-";
    std::size_t window = 250;
    std::string bandwidth = "RuleOfThumbIQR";
    double fixed_h = 0.0, threshold_prob = 0.90;
    int es_sublevels = 20, caviar_starts = 25;
    auto* forecast = app.add_subcommand("forecast", "Rolling one-step VaR/ES forecasts");
    forecast->add_option("losses", losses_path, "CSV with a loss column (date optional)")->required();
    forecast->add_option("--model", model_list, "comma-separated models");
    forecast->add_option("--alpha", alpha_list, "comma-separated tail probabilities");
    forecast->add_option("--window", window, "rolling window length");
    forecast->add_option("--truth", truth_path, "simulated path CSV (needed for Oracle)");
    forecast->add_option("--bandwidth", bandwidth, "LLQAR bandwidth rule: RuleOfThumbIQR, QCV or Fixed");
    forecast->add_option("--fixed-h", fixed_h, "fixed LLQAR bandwidth");
    forecast->add_option("--es-sublevels", es_sublevels, "quantile levels averaged for LLQAR/QAR ES");
    forecast->add_option("--threshold-prob", threshold_prob, "GPD threshold probability");
    forecast->add_option("--caviar-starts", caviar_starts, "random CAViaR starts");
    forecast->add_option("-o,--out", out_path, "output CSV (- for stdout)");

    std::string forecasts_path, bt_truth, bt_out = "-";
    int boot_B = 1000;
    std::uint64_t boot_seed = BacktestOptions{}.seed;
    auto* backtest = app.add_subcommand("backtest", "Coverage, ES bootstrap and V measure per model and alpha");
    backtest->add_option("forecasts", forecasts_path, "forecast CSV")->required();
    backtest->add_option("--truth", bt_truth, "simulated path CSV for RMSE against the true VaR/ES");
    backtest->add_option("--B", boot_B, "bootstrap resamples");
    backtest->add_option("--seed", boot_seed, "bootstrap seed");
    backtest->add_option("-o,--out", bt_out, "output CSV (- for stdout)");

    std::string scenario = "Constant", sim_alphas = "0.05,0.01", sim_out = "-", sim_config;
    std::uint64_t sim_seed = 1, sim_rep = 0;
    std::size_t sim_n = 1000;
    auto* simulate = app.add_subcommand("simulate", "Simulate an eGARCH-t path with a gamma profile");
    simulate->add_option("--scenario", scenario, "Constant, Step or Smooth");
    simulate->add_option("--seed", sim_seed, "seed");
    simulate->add_option("--rep", sim_rep, "replication stream");
    simulate->add_option("--n", sim_n, "number of observations");
    simulate->add_option("--alpha", sim_alphas, "tail probabilities for the true VaR/ES columns");
    simulate->add_option("--config", sim_config, "study config supplying eGARCH and profile parameters");
    simulate->add_option("-o,--out", sim_out, "output CSV (- for stdout)");

    std::string study_config, out_dir = ".";
    auto* study = app.add_subcommand("mc-study", "Monte Carlo study; any config key can be overridden with --key value");
    study->add_option("--config", study_config, "JSON study config")->required();
    study->add_option("--out-dir", out_dir, "directory for the report CSVs");
    study->allow_extras();

    std::string rep_forecasts, rep_backtest, rep_out = "-", rep_long;
    auto* report = app.add_subcommand("report", "Join forecast and backtest CSVs into a comparison table");
    report->add_option("--forecasts", rep_forecasts, "forecast CSV")->required();
    report->add_option("--backtest", rep_backtest, "backtest CSV")->required();
    report->add_option("-o,--out", rep_out, "comparison table (- for stdout)");
    report->add_option("--long", rep_long, "plot-ready long-format CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        err << app.help();
        return kExitUsage;
    }

    try {
        if (*ingest) {
            auto in = open_in(prices_path);
            const PriceSeries prices = parse_price_csv(in);
            const LogLossSeries losses = log_losses(prices);
            emit(losses_out, out, [&](std::ostream& o) { write_losses_csv(o, losses); });
            emit(summary_out, out, [&](std::ostream& o) { write_summary_csv(o, summary_stats(losses.losses)); });
            return kExitOk;
        }

        if (*forecast) {
            auto in = open_in(losses_path);
            const LogLossSeries series = read_losses_csv(in);
            std::vector<ModelId> models;
            for (const auto& name : split_list(model_list)) models.push_back(parse_model(name));
            if (models.empty()) throw UsageError("no model given");
            const std::vector<double> alphas = parse_alphas(alpha_list);

            ForecastConfig cfg;
            cfg.window = window;
            cfg.evt_threshold_prob = threshold_prob;
            cfg.llqar.bandwidth_rule = parse_bandwidth_rule(bandwidth);
            if (fixed_h > 0.0) cfg.llqar.fixed_h = fixed_h;
            cfg.llqar.es_sublevels = es_sublevels;
            cfg.caviar.starts = caviar_starts;

            std::optional<SimPath> truth;
            if (!truth_path.empty()) {
                auto tin = open_in(truth_path);
                truth = read_simpath_csv(tin);
            }
            const auto records = forecast_models(series, models, alphas, cfg, truth ? &*truth : nullptr);
            emit(out_path, out, [&](std::ostream& o) { write_forecast_csv(o, records); });
            std::size_t failed = 0;
            for (const auto& r : records) failed += (r.flags & kWindowError) != 0;
            if (failed > 0) {
                err << "tailrisk: " << failed << " forecast windows failed (flagged window-error)\n";
                return kExitNumerical;
            }
            return kExitOk;
        }

        if (*backtest) {
            auto in = open_in(forecasts_path);
            const auto records = read_forecast_csv(in);
            std::optional<SimPath> truth;
            if (!bt_truth.empty()) {
                auto tin = open_in(bt_truth);
                truth = read_simpath_csv(tin);
            }
            BacktestOptions opt;
            opt.bootstrap_B = boot_B;
            opt.seed = boot_seed;
            const auto reports = backtest_all(records, opt, truth ? &*truth : nullptr);
            emit(bt_out, out, [&](std::ostream& o) { write_backtest_csv(o, reports); });
            return kExitOk;
        }

        if (*simulate) {
            StudyConfig cfg;
            if (!sim_config.empty()) {
                auto cin = open_in(sim_config);
                std::stringstream text;
                text << cin.rdbuf();
                cfg = study_config_from_json(text.str());
            }
            const GammaProfile g = gamma_profile(parse_gamma_spec(scenario), sim_n, cfg.profile);
            const SimPath path = simulate_egarch(cfg.egarch, sim_n, sim_seed, g.values, sim_rep);
            const auto alphas = parse_alphas(sim_alphas);
            emit(sim_out, out, [&](std::ostream& o) { write_simpath_csv(o, path, alphas); });
            return kExitOk;
        }

        if (*study) {
            auto cin = open_in(study_config);
            std::stringstream text;
            text << cin.rdbuf();
            std::vector<std::pair<std::string, std::string>> overrides;
            const auto extras = study->remaining();
            for (std::size_t i = 0; i < extras.size(); ++i) {
                const std::string& a = extras[i];
                if (a.rfind("--", 0) != 0 || a.size() < 3) throw UsageError("unexpected argument: " + a);
                const std::string body = a.substr(2);
                const auto eq = body.find('=');
                if (eq != std::string::npos) {
                    overrides.emplace_back(body.substr(0, eq), body.substr(eq + 1));
                } else {
                    if (i + 1 >= extras.size()) throw UsageError("missing value for --" + body);
                    overrides.emplace_back(body, extras[++i]);
                }
            }
            const StudyConfig cfg = study_config_from_json(text.str(), overrides);
            std::filesystem::create_directories(out_dir);
            const StudyReport rep = run_mc_study(cfg);
            const std::filesystem::path dir(out_dir);
            emit((dir / "rejections.csv").string(), out, [&](std::ostream& o) { write_rejections_csv(o, rep); });
            emit((dir / "rmse.csv").string(), out, [&](std::ostream& o) { write_rmse_csv(o, rep); });
            emit((dir / "regions.csv").string(), out, [&](std::ostream& o) { write_regions_csv(o, rep); });
            emit((dir / "diagnostics.csv").string(), out, [&](std::ostream& o) { write_diagnostics_csv(o, rep); });
            emit((dir / "totals.csv").string(), out, [&](std::ostream& o) { write_study_totals_csv(o, rep); });
            emit((dir / "config.json").string(), out, [&](std::ostream& o) { o << study_config_to_json(cfg) << '\n'; });
            return kExitOk;
        }

        if (*report) {
            auto fin = open_in(rep_forecasts);
            const auto records = read_forecast_csv(fin);
            auto bin = open_in(rep_backtest);
            const auto reports = read_backtest_csv(bin);

            std::map<std::pair<std::string, double>, ReportRow> agg;
            for (const auto& r : records) {
                auto& row = agg[{std::string(to_string(r.model)), r.alpha}];
                ++row.records;
                if (r.flags & kWindowError) {
                    ++row.window_errors;
                    continue;
                }
                row.sum_var += r.var;
                if (r.es) {
                    row.sum_es += *r.es;
                    ++row.n_es;
                }
            }
            const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; };
            emit(rep_out, out, [&](std::ostream& o) {
                o << "model,alpha,records,window_errors,mean_var,mean_es,n,x,prop,uc_p,cc_p,es_boot_p,v,rmse_var,"
                     "rmse_es\n";
                for (const auto& b : reports) {
                    const auto it = agg.find({std::string(to_string(b.model)), b.alpha});
                    const ReportRow row = it == agg.end() ? ReportRow{} : it->second;
                    const std::size_t used = row.records - row.window_errors;
                    o << to_string(b.model) << ',' << format_double(b.alpha) << ',' << row.records << ','
                      << row.window_errors << ','
                      << (used ? format_double(row.sum_var / static_cast<double>(used)) : std::string{}) << ','
                      << (row.n_es ? format_double(row.sum_es / static_cast<double>(row.n_es)) : std::string{})
                      << ',' << b.n << ',' << b.x << ',' << format_double(b.prop) << ',' << format_double(b.uc_p)
                      << ',' << format_double(b.cc_p) << ',' << opt(b.es_boot_p) << ',' << opt(b.v) << ','
                      << opt(b.rmse_var) << ',' << opt(b.rmse_es) << '\n';
                }
            });
            if (!rep_long.empty()) {
                emit(rep_long, out, [&](std::ostream& o) {
                    o << "t,date,model,alpha,series,value\n";
                    for (const auto& r : records) {
                        const std::string key = std::to_string(r.t) + ',' + r.date + ',' + std::string(to_string(r.model)) +
                                                ',' + format_double(r.alpha) + ',';
                        o << key << "loss," << format_double(r.loss) << '\n';
                        o << key << "var," << format_double(r.var) << '\n';
                        if (r.es) o << key << "es," << format_double(*r.es) << '\n';
                    }
                });
            }
            return kExitOk;
        }
    } catch (const Error& e) {
        err << "tailrisk: " << describe(e) << '\n';
        return classify(e);
    } catch (const std::filesystem::filesystem_error& e) {
        err << "tailrisk: " << e.what() << '\n';
        return kExitData;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace tailrisk
