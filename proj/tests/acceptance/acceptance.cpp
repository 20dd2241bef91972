// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
// Usage: tailrisk_acceptance [--only 1,2,...] [--work-dir DIR] [--expected-fail 7,...]
// Criteria listed in --expected-fail still print FAIL but do not set the exit code.
// Criterion 11 reads TAILRISK_REALDATA_DIR (sp500.csv, aapl.csv, ibm.csv, wmt.csv as date,close).

#include "oracles.hpp"

#include "tailrisk/backtest.hpp"
#include "tailrisk/cli.hpp"
#include "tailrisk/csv_io.hpp"
#include "tailrisk/dist.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/evt.hpp"
#include "tailrisk/garch.hpp"
#include "tailrisk/market_data.hpp"
#include "tailrisk/quantreg.hpp"
#include "tailrisk/risk_forecast.hpp"
#include "tailrisk/simstudy.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace tailrisk;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kC1IdentityTol = 1e-9;
constexpr double kC1AnchorTol = 1e-8;
constexpr double kC1Budget = 1.0;
constexpr double kC2RelTol = 1e-6;
constexpr double kC2Budget = 30.0;
constexpr double kC3ParamTol = 0.05;
constexpr double kC3Budget = 120.0;
constexpr double kC4ParamTol = 0.05;
constexpr double kC4ContinuityTol = 1e-6;
constexpr double kRecoveryShare = 0.90;
constexpr double kC5RateLow = 0.02, kC5RateHigh = 0.08;
constexpr double kC5PTol = 1e-8;
constexpr double kC5LrAnchor = 5.02517, kC5LrTol = 1e-5;
constexpr double kC5PAnchor = 0.0250, kC5PAnchorTol = 1e-4;
constexpr double kC6Ratio = 3.0;
constexpr double kC6EsMaxPct = 10.0;
constexpr double kC6Budget = 20.0 * 60.0;
constexpr double kC8RatioTol = 0.01;
constexpr std::size_t kC8Draws = 10'000'000;
constexpr double kC9SeBand = 3.0;
constexpr double kC11Tol = 5e-4;

struct Outcome {
    enum Status { Pass, Fail, Skip } status = Fail;
    std::string detail;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)}; }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path g_work;

// ---------------------------------------------------------------------------
// 1. quantile o cdf identity and the 97.5% normal quantile

Outcome c1() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_excess = 0.0, worst_literal = 0.0, worst_upper = 0.0, worst_roundtrip_p = 0.0;
    bool ok = true;
    for (const Dist& d : {Dist::normal(), Dist::standardized_t(3.0), Dist::standardized_t(6.0), Dist::standardized_t(30.0)}) {
        for (int i = -800; i <= 800; ++i) {
            const double x = i * 0.01;
            const double p = cdf(d, x);
            const double err = std::abs(quantile(d, p) - x);
            // error forced by rounding p to a double
            const double floor_err = (std::nextafter(p, 2.0) - p) / pdf(d, x);
            worst_literal = std::max(worst_literal, err);
            worst_excess = std::max(worst_excess, err - floor_err);
            if (err > kC1IdentityTol + floor_err) ok = false;
            if (x > 0.0) {
                const double upper = std::abs(-quantile(d, survival(d, x)) - x);
                worst_upper = std::max(worst_upper, upper);
                if (upper > kC1IdentityTol) ok = false;
            }
            if (p > 0.0 && p < 1.0) worst_roundtrip_p = std::max(worst_roundtrip_p, std::abs(cdf(d, quantile(d, p)) - p));
        }
    }
    const double bis = oracle::bisect(oracle::normal_cdf_series, 0.975, -10.0, 10.0);
    const double q = quantile(Dist::normal(), 0.975);
    const double anchor_err = std::max(std::abs(q - 1.959963985), std::abs(q - bis));
    const double secs = seconds_since(t0);
    ok = ok && anchor_err < kC1AnchorTol && worst_roundtrip_p < 1e-10 && secs < kC1Budget;
    return verdict(ok, fmt("identity excess over p-rounding floor %.1e (raw max %.1e), upper tail via survival %.1e, "
                           "|cdf(q(p))-p| %.1e, q(0.975)=%.10f vs bisection %.10f, %.2fs",
                           std::max(worst_excess, 0.0), worst_literal, worst_upper, worst_roundtrip_p, q, bis, secs));
}

// ---------------------------------------------------------------------------
// 2. quantile regression against the exhaustive vertex oracle

Outcome c2() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(20240611);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int solved = 0, singular = 0, bad = 0;
    double worst_rel = 0.0;
    for (int inst = 0; inst < 200; ++inst) {
        const int p = 1 + inst % 3;
        const int n = p + 5 + static_cast<int>(U(gen) * (12 - p - 5 + 1));
        Eigen::MatrixXd X(n, p);
        Eigen::VectorXd y(n), w(n);
        for (int i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            for (int j = 1; j < p; ++j) X(i, j) = std::round((U(gen) * 4 - 2) * 4) / 4;  // coarse grid gives ties
            y[i] = (inst % 5 == 0 ? std::round(U(gen) * 4) : U(gen) * 3 - 1) + (p > 1 ? 0.7 * X(i, 1) : 0.0);
            w[i] = U(gen) < 0.15 ? 0.0 : (inst % 4 == 0 ? 1.0 : U(gen) + 0.05);
        }
        w[0] = 1.0;
        const double tau = 0.02 + 0.96 * U(gen);
        QrFit fit;
        try {
            fit = weighted_linear_qr(X, y, w, tau);
        } catch (const SingularDesign&) {
            ++singular;
            continue;
        }
        ++solved;
        const double best = oracle::qr_exhaustive(X, y, w, tau);
        const double rel = (fit.objective - best) / std::max(best, 1e-12);
        const double recomputed = oracle::qr_objective(X, y, w, fit.beta, tau);
        worst_rel = std::max(worst_rel, rel);
        if (rel > kC2RelTol || std::abs(recomputed - fit.objective) > 1e-9 * std::max(1.0, best)) ++bad;
        if (p == 1) {
            std::vector<double> yv(y.data(), y.data() + n), wv(w.data(), w.data() + n);
            if (fit.beta[0] != oracle::weighted_quantile_sorted(yv, wv, tau)) ++bad;
        }
    }
    const double secs = seconds_since(t0);
    return verdict(bad == 0 && solved >= 150 && secs < kC2Budget,
                   fmt("%d solved, %d rank-deficient skipped, %d mismatches, worst relative gap %.1e, %.2fs", solved,
                       singular, bad, worst_rel, secs));
}

// ---------------------------------------------------------------------------
// 3. GARCH(1,1) recovery

Outcome c3() {
    const auto t0 = std::chrono::steady_clock::now();
    const GarchParams truth{1e-6, 0.08, 0.90, 0.0, std::nullopt};
    int within = 0, below_truth = 0, below_truth_mu0 = 0, failed = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto x = simulate_garch(truth, 2000, seed);
        FittedGarch fit;
        try {
            fit = fit_garch(x, DistKind::StandardNormal);
        } catch (const FitError&) {
            ++failed;
            continue;
        }
        if (std::abs(fit.params.alpha - truth.alpha) <= kC3ParamTol && std::abs(fit.params.beta - truth.beta) <= kC3ParamTol)
            ++within;
        GarchParams at_truth = truth;
        at_truth.mu = fit.params.mu;  // same demeaned series
        if (fit.loglik < garch_loglik(x, at_truth) - 1e-9) ++below_truth;
        if (fit.loglik < garch_loglik(x, truth) - 1e-9) ++below_truth_mu0;
    }
    const double secs = seconds_since(t0);
    return verdict(within >= kRecoveryShare * 50 && below_truth == 0 && failed == 0 && secs < kC3Budget,
                   fmt("%d/50 within +-%.2f on alpha and beta, %d fits below the true-parameter loglik (%d when the "
                       "truth keeps mu = 0), %d fit failures, %.1fs",
                       within, kC3ParamTol, below_truth, below_truth_mu0, failed, secs));
}

// ---------------------------------------------------------------------------
// 4. GPD recovery and the zero-shape continuity

Outcome c4() {
    int within = 0, below_truth = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        std::mt19937_64 gen(seed * 7919);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        std::vector<double> x(5000);
        for (auto& v : x) v = (std::pow(1.0 - U(gen), -0.2) - 1.0) / 0.2;
        const auto est = fit_gpd(x);
        if (std::abs(est.zeta - 0.2) <= kC4ParamTol && std::abs(est.psi - 1.0) <= kC4ParamTol) ++within;
        if (est.loglik < gpd_loglik(x, 0.2, 1.0) - 1e-9) ++below_truth;
    }
    double gap = 0.0;
    for (double z : {1e-9, -1e-9, 1e-12, -1e-12}) {
        const GpdFit f0{0.0, 0.8, 1.5, 1000, 100}, fz{z, 0.8, 1.5, 1000, 100};
        for (double a : {0.05, 0.01, 0.001}) {
            const double q0 = gpd_tail_quantile(f0, a), qz = gpd_tail_quantile(fz, a);
            gap = std::max({gap, std::abs(q0 - qz), std::abs(gpd_tail_es(f0, q0) - gpd_tail_es(fz, q0))});
        }
        const std::vector<double> ex{0.1, 0.7, 2.5, 4.0};
        gap = std::max(gap, std::abs(gpd_loglik(ex, z, 0.8) - gpd_loglik(ex, 0.0, 0.8)));
    }
    return verdict(within >= kRecoveryShare * 50 && below_truth == 0 && gap < kC4ContinuityTol,
                   fmt("%d/50 within +-%.2f on shape and scale, %d fits below the true loglik, continuity gap %.1e",
                       within, kC4ParamTol, below_truth, gap));
}

// ---------------------------------------------------------------------------
// 5. UC size, chi-squared p-values, hand anchor

Outcome c5() {
    std::mt19937_64 gen(5);
    std::bernoulli_distribution B(0.05);
    int rej = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        std::size_t x = 0;
        for (int i = 0; i < 250; ++i) x += B(gen);
        if (kupiec_uc(x, 250, 0.05).p < 0.05) ++rej;
    }
    const double rate = rej / 1000.0;
    double worst = 0.0;
    for (double df : {1.0, 2.0})
        for (int i = 0; i <= 400; ++i) {
            const double x = 0.05 * i;
            worst = std::max(worst, std::abs(chi_squared_sf(x, df) - oracle::chi2_sf(x, df)));
        }
    for (std::size_t x = 0; x <= 40; ++x) {
        const auto uc = kupiec_uc(x, 250, 0.05);
        worst = std::max(worst, std::abs(uc.p - oracle::chi2_sf(uc.lr, 1.0)));
    }
    const auto anchor = kupiec_uc(0, 250, 0.01);
    const bool ok = rate >= kC5RateLow && rate <= kC5RateHigh && worst < kC5PTol &&
                    std::abs(anchor.lr - kC5LrAnchor) < kC5LrTol && std::abs(anchor.p - kC5PAnchor) < kC5PAnchorTol;
    return verdict(ok, fmt("UC rejection rate %.1f%%, max p-value gap %.1e, anchor LR %.5f p %.5f", 100.0 * rate, worst,
                           anchor.lr, anchor.p));
}

// ---------------------------------------------------------------------------
// Shared desk-scale studies for 6-9

struct Studies {
    StudyReport constant, step;
    double constant_secs = 0.0, step_secs = 0.0;
};

const Studies& studies() {
    static const Studies s = [] {
        Studies out;
        StudyConfig cfg = study_preset("desk");
        cfg.scenario = GammaSpec::Constant;
        auto t0 = std::chrono::steady_clock::now();
        out.constant = run_mc_study(cfg);
        out.constant_secs = seconds_since(t0);
        cfg.scenario = GammaSpec::Step;
        t0 = std::chrono::steady_clock::now();
        out.step = run_mc_study(cfg);
        out.step_secs = seconds_since(t0);
        return out;
    }();
    return s;
}

const RejectionRow* find_row(const StudyReport& r, ModelId m, double alpha) {
    for (const auto& row : r.rejections)
        if (row.model == m && row.alpha == alpha) return &row;
    return nullptr;
}

Outcome c6() {
    const auto& s = studies();
    const auto* n1 = find_row(s.constant, ModelId::nGARCH, 0.01);
    const auto* t1 = find_row(s.constant, ModelId::tGARCH, 0.01);
    if (!n1 || !t1) return verdict(false, "study rows missing");
    const bool ok = n1->uc_pct >= kC6Ratio * t1->uc_pct && t1->es_pct <= kC6EsMaxPct && s.constant_secs < kC6Budget;
    return verdict(ok, fmt("alpha 0.01, %zu reps: UC rejections nGARCH %.1f%% vs tGARCH %.1f%%, tGARCH ES-bootstrap "
                           "rejections %.1f%%, completed %zu/%zu, %.0fs",
                           s.constant.config.n_reps, n1->uc_pct, t1->uc_pct, t1->es_pct, n1->completed, t1->completed,
                           s.constant_secs));
}

Outcome c7() {
    const auto& s = studies();
    std::vector<ModelId> models;
    for (ModelId m : s.constant.config.models)
        if (m != ModelId::Oracle) models.push_back(m);
    const auto rc = mean_rmse_ranks(s.constant, models, 0.05);
    const auto rs = mean_rmse_ranks(s.step, models, 0.05);
    const double a = rc.at(ModelId::LLQAR), b = rs.at(ModelId::LLQAR);
    std::ostringstream ranks;
    for (ModelId m : models) ranks << ' ' << to_string(m) << ' ' << fmt("%.2f->%.2f", rc.at(m), rs.at(m));
    return verdict(b < a, fmt("LLQAR mean rank of 95%% VaR RMSE among %zu models: Constant %.2f, Step %.2f (Step study "
                              "%.0fs);",
                              models.size(), a, b, s.step_secs) +
                              ranks.str());
}

Outcome c8() {
    const auto& s = studies();
    const std::size_t below = s.constant.es_below_var + s.step.es_below_var;
    const std::size_t mono = s.constant.var_monotonicity_violations + s.step.var_monotonicity_violations;
    const double nu = s.constant.config.egarch.nu;
    const auto draws = oracle::std_t_draws(nu, kC8Draws, 424242);
    const std::vector<double> gamma(400, 1.0);
    const auto path = simulate_egarch(s.constant.config.egarch, 400, 17, gamma);
    double worst = 0.0;
    std::string detail;
    for (double a : {0.05, 0.01}) {
        const auto [q, tail] = oracle::mc_tail(draws, a);
        const double mc_ratio = tail / q;
        const auto tg = var_es_tgarch(1.0, nu, a);
        const auto [tv, te] = true_var_es(path, a);
        const double r_t = tg.es / tg.var;
        double r_true = 0.0;
        for (std::size_t t = 0; t < tv.size(); ++t) r_true = std::max(r_true, std::abs(te[t] / tv[t] / mc_ratio - 1.0));
        worst = std::max({worst, std::abs(r_t / mc_ratio - 1.0), r_true});
        detail += fmt(" alpha %.2f: MC %.4f tGARCH %.4f true %.4f;", a, mc_ratio, r_t, te[0] / tv[0]);
    }
    return verdict(below == 0 && mono == 0 && worst < kC8RatioTol,
                   fmt("%zu records with es < var, %zu VaR ordering violations across alphas, worst ES/VaR ratio gap "
                       "%.2f%%;",
                       below, mono, 100.0 * worst) +
                       detail);
}

Outcome c9() {
    bool hand = true;
    {
        const std::vector<double> l{3.0}, v{2.0}, e{2.5}, s{0.5}, e2{2.0};
        const auto m = v_measure(l, v, e);
        hand = hand && m.v1 == 0.5 && m.v2 == 1.0 && m.v == -0.5;
        hand = hand && exceedance_residuals(l, v, e2, s) == std::vector<double>{2.0};
        const std::vector<double> l3{1.0, 4.0, 6.0}, v3{2.0, 2.0, 2.0}, s3{1.0, 1.0, 1.0};
        hand = hand && v_measure(l3, v3, l3).v == 0.0;
        hand = hand && exceedance_residuals(l3, v3, l3, s3) == std::vector<double>{0.0, 0.0};
    }
    std::size_t nonzero = 0, oracle_reps = 0;
    std::string detail;
    bool v_ok = true;
    for (const StudyReport* r : {&studies().constant, &studies().step}) {
        for (double a : r->config.alphas) {
            std::vector<double> vs;
            for (const auto& rep : r->reps) {
                if (rep.model != ModelId::Oracle || rep.alpha != a || !rep.completed) continue;
                ++oracle_reps;
                if (*rep.backtest.rmse_var != 0.0 || *rep.backtest.rmse_es != 0.0) ++nonzero;
                if (rep.backtest.v) vs.push_back(*rep.backtest.v);
            }
            if (vs.size() < 3) {
                v_ok = false;
                continue;
            }
            const double m = oracle::mean(vs), se = oracle::sample_sd(vs) / std::sqrt(static_cast<double>(vs.size()));
            if (std::abs(m) > kC9SeBand * se) v_ok = false;
            detail += fmt(" %s alpha %.2f mean V %.2e (se %.1e);", std::string(to_string(r->config.scenario)).c_str(), a, m, se);
        }
    }
    return verdict(hand && nonzero == 0 && oracle_reps > 0 && v_ok,
                   fmt("hand cases %s, Oracle reps with nonzero RMSE %zu/%zu;", hand ? "exact" : "WRONG", nonzero,
                       oracle_reps) +
                       detail);
}

// ---------------------------------------------------------------------------
// 10. byte-identical CLI outputs

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "tailrisk");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome c10() {
    const fs::path dir = g_work / "determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto sim = (dir / "sim.csv").string();
    if (run_cli({"simulate", "--scenario", "Smooth", "--seed", "8", "--n", "320", "-o", sim}) != 0)
        return verdict(false, "simulate failed");

    int codes = 0;
    std::vector<std::string> forecasts;
    for (int i = 0; i < 2; ++i) {
        const auto out = (dir / ("f" + std::to_string(i) + ".csv")).string();
        codes |= run_cli({"forecast", sim, "--model", "Oracle,tGARCH,gpdNGARCH,DFGARCH,LLQAR,QAR1,CAViaR-AS", "--alpha",
                          "0.05,0.01", "--truth", sim, "--caviar-starts", "5", "-o", out});
        forecasts.push_back(slurp(out));
    }
    {
        std::ofstream f(dir / "study.json");
        f << R"({"preset":"desk","n_obs":300,"n_reps":4,"bootstrap_B":200,"seed":99,"scenario":"Step",)"
          << R"("models":["Oracle","nGARCH","tGARCH","gpdTGARCH","LLQAR"]})";
    }
    const char* files[] = {"rejections.csv", "rmse.csv", "regions.csv", "diagnostics.csv", "totals.csv", "config.json"};
    std::vector<std::string> runs;
    const std::vector<std::string> threads{"1", "4", "4"};
    for (std::size_t i = 0; i < threads.size(); ++i) {
        const auto out = dir / ("study" + std::to_string(i));
        codes |= run_cli({"mc-study", "--config", (dir / "study.json").string(), "--out-dir", out.string(), "--threads",
                          threads[i]});
        std::string all;
        for (const char* f : files) all += f + std::string(":") + slurp(out / f);
        // config.json records the thread count itself
        runs.push_back(all.substr(0, all.find("config.json:")));
        if (i > 0 && threads[i] == threads[i - 1] && slurp(out / "config.json") != slurp(dir / ("study" + std::to_string(i - 1)) / "config.json"))
            codes |= 64;
    }
    const bool f_same = forecasts[0] == forecasts[1] && !forecasts[0].empty();
    const bool s_same = runs[0] == runs[1] && runs[1] == runs[2] && runs[0].size() > 100;
    return verdict(codes == 0 && f_same && s_same,
                   fmt("forecast reruns %s (%zu bytes), mc-study with 1/4/4 threads %s (%zu bytes), exit codes %s",
                       f_same ? "identical" : "DIFFER", forecasts[0].size(), s_same ? "identical" : "DIFFER",
                       runs[0].size(), codes == 0 ? "all 0" : "nonzero"));
}

// ---------------------------------------------------------------------------
// 11. optional real-data summary statistics

Outcome c11() {
    const char* dir = std::getenv("TAILRISK_REALDATA_DIR");
    if (!dir) return {Outcome::Skip, "set TAILRISK_REALDATA_DIR to a folder with sp500.csv, aapl.csv, ibm.csv, wmt.csv"};
    struct Ref {
        const char* file;
        double mean, sd;
    };
    const Ref refs[] = {{"sp500.csv", -0.00025, 0.01301},
                        {"aapl.csv", -0.00099, 0.02034},
                        {"ibm.csv", -8.975e-05, 0.01513},
                        {"wmt.csv", -0.00027, 0.01316}};
    bool ok = true;
    std::string detail;
    for (const auto& r : refs) {
        std::ifstream in(fs::path(dir) / r.file);
        if (!in) return verdict(false, std::string("missing ") + r.file);
        PriceSeries p = parse_price_csv(in);
        PriceSeries cut;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (p.dates[i] >= "2007-01-03" && p.dates[i] <= "2022-11-11") {
                cut.dates.push_back(p.dates[i]);
                cut.prices.push_back(p.prices[i]);
            }
        const auto st = summary_stats(log_losses(cut).losses);
        const bool hit = std::abs(st.mean - r.mean) < kC11Tol && std::abs(st.sd - r.sd) < kC11Tol;
        ok = ok && hit;
        detail += fmt(" %s mean %.5f sd %.5f%s;", r.file, st.mean, st.sd, hit ? "" : " (off)");
    }
    return verdict(ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only, expected_fail;
    g_work = fs::temp_directory_path() / "tailrisk_acceptance";
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
        } else if (a == "--expected-fail" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) expected_fail.insert(std::stoi(tok));
        } else if (a == "--work-dir" && i + 1 < argc) {
            g_work = argv[++i];
        } else {
            std::cerr << "usage: tailrisk_acceptance [--only 1,2,...] [--work-dir DIR] [--expected-fail 7,...]\n";
            return 2;
        }
    }
    fs::create_directories(g_work);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"numerics: quantile/cdf identity and normal 97.5% quantile", c1},
        {"quantile regression vs exhaustive vertex oracle", c2},
        {"GARCH(1,1) parameter recovery", c3},
        {"GPD parameter recovery and zero-shape continuity", c4},
        {"UC size, chi-squared p-values, hand anchor", c5},
        {"desk-scale Constant study: nGARCH vs tGARCH at 1%", c6},
        {"LLQAR RMSE rank improves from Constant to Step", c7},
        {"ES coherence and ES/VaR ratio vs Monte Carlo tail means", c8},
        {"V measure and residual anchors, Oracle passthrough", c9},
        {"determinism of forecast and mc-study", c10},
        {"optional real-data summary statistics", c11},
    };

    int failures = 0, known = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && !only.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {Outcome::Fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.status == Outcome::Pass ? "PASS" : o.status == Outcome::Skip ? "SKIP" : "FAIL";
        if (o.status == Outcome::Fail) ++(expected_fail.count(id) ? known : failures);
        std::cout << tag << " criterion " << id << " (" << criteria[i].first << "): " << o.detail;
        if (o.status == Outcome::Fail && expected_fail.count(id)) std::cout << " [expected failure]";
        if (o.status == Outcome::Pass && expected_fail.count(id)) std::cout << " [listed as expected failure but passed]";
        std::cout << std::endl;
    }
    std::cout << "summary: " << failures << " unexpected failure(s), " << known << " expected failure(s)" << std::endl;
    return failures == 0 ? 0 : 1;
}
