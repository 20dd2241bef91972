#include "tailrisk/backtest.hpp"

#include "tailrisk/dist.hpp"
#include "tailrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tailrisk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// x ln p with 0 ln 0 = 0.
double xlogy(double x, double p) { return x == 0.0 ? 0.0 : x * std::log(p); }

double bernoulli_loglik(double zeros, double ones, double p) { return xlogy(zeros, 1.0 - p) + xlogy(ones, p); }

double chi2_sf(double x, int df) {
    if (x <= 0.0) return 1.0;
    if (df == 1) return std::erfc(std::sqrt(0.5 * x));
    if (df == 2) return std::exp(-0.5 * x);
    return chi_squared_sf(x, df);
}

void check_same_length(std::size_t a, std::size_t b) {
    if (a != b) throw AlignmentError("sequences differ in length");
}

double studentized_mean(std::span<const double> r) {
    const double m = static_cast<double>(r.size());
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / m;
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (m - 1.0));
    if (sd > 0.0) return mean / (sd / std::sqrt(m));
    if (mean > 0.0) return std::numeric_limits<double>::infinity();
    if (mean < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
}

}  // namespace

ViolationSeries violations(std::span<const double> losses, std::span<const double> var) {
    check_same_length(losses.size(), var.size());
    ViolationSeries v;
    v.n = losses.size();
    v.indicators.resize(v.n);
    for (std::size_t t = 0; t < v.n; ++t) {
        v.indicators[t] = losses[t] > var[t] ? 1 : 0;
        v.x += v.indicators[t];
    }
    return v;
}

LrTest kupiec_uc(std::size_t x, std::size_t n, double alpha_tail) {
    if (n == 0 || x > n) throw DomainError("need 0 <= x <= n and n >= 1");
    if (!(alpha_tail > 0.0 && alpha_tail < 1.0)) throw DomainError("alpha_tail must lie in (0, 1)");
    const double xd = static_cast<double>(x), zeros = static_cast<double>(n - x);
    const double pi_hat = xd / static_cast<double>(n);
    const double lr = std::max(
        0.0, -2.0 * (bernoulli_loglik(zeros, xd, alpha_tail) - bernoulli_loglik(zeros, xd, pi_hat)));
    return {lr, chi2_sf(lr, 1)};
}

LrTest christoffersen_cc(const ViolationSeries& v, double alpha_tail) {
    if (v.n < 2) throw InsufficientData("conditional coverage needs at least two indicators");
    double n00 = 0, n01 = 0, n10 = 0, n11 = 0;
    for (std::size_t t = 1; t < v.n; ++t) {
        const bool prev = v.indicators[t - 1] != 0, cur = v.indicators[t] != 0;
        if (!prev && !cur) ++n00;
        else if (!prev && cur) ++n01;
        else if (prev && !cur) ++n10;
        else ++n11;
    }
    const double pi = (n01 + n11) / (n00 + n01 + n10 + n11);
    const double ll0 = bernoulli_loglik(n00 + n10, n01 + n11, pi);
    double ll1 = 0.0;
    if (n00 + n01 > 0) ll1 += bernoulli_loglik(n00, n01, n01 / (n00 + n01));
    if (n10 + n11 > 0) ll1 += bernoulli_loglik(n10, n11, n11 / (n10 + n11));
    const double lr_ind = std::max(0.0, -2.0 * (ll0 - ll1));
    const double lr = kupiec_uc(v.x, v.n, alpha_tail).lr + lr_ind;
    return {lr, chi2_sf(lr, 2)};
}

std::vector<double> exceedance_residuals(std::span<const double> losses, std::span<const double> var,
                                         std::span<const double> es, std::span<const double> sigma) {
    check_same_length(losses.size(), var.size());
    check_same_length(losses.size(), es.size());
    check_same_length(losses.size(), sigma.size());
    std::vector<double> r;
    for (std::size_t t = 0; t < losses.size(); ++t) {
        if (!(losses[t] > var[t])) continue;
        if (!(sigma[t] > 0.0)) throw DomainError("sigma must be positive at violation times");
        r.push_back((losses[t] - es[t]) / sigma[t]);
    }
    if (r.empty()) throw EmptyResiduals("no violations");
    return r;
}

double es_bootstrap_test(std::span<const double> r, int B, std::uint64_t seed) {
    if (r.size() < 3) throw InsufficientData("bootstrap test needs at least 3 residuals");
    if (B < 1) throw DomainError("bootstrap needs B >= 1");
    const double m = static_cast<double>(r.size());
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / m;
    double ss = 0.0;
    for (double v : r) ss += (v - mean) * (v - mean);
    if (!(ss > 0.0)) throw DegenerateResiduals("residuals have zero spread");
    const double t_obs = studentized_mean(r);

    std::vector<double> centered(r.size()), draw(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) centered[i] = r[i] - mean;
    Rng rng(seed);
    int at_least = 0;
    for (int b = 0; b < B; ++b) {
        for (double& d : draw) d = centered[rng.index(centered.size())];
        if (studentized_mean(draw) >= t_obs) ++at_least;
    }
    return (1.0 + at_least) / (B + 1.0);
}

VMeasure v_measure(std::span<const double> losses, std::span<const double> var, std::span<const double> es) {
    check_same_length(losses.size(), var.size());
    check_same_length(losses.size(), es.size());
    double s1 = 0.0, s2 = 0.0;
    std::size_t k = 0;
    for (std::size_t t = 0; t < losses.size(); ++t) {
        if (!(losses[t] > var[t])) continue;
        s1 += es[t] - var[t];
        s2 += losses[t] - var[t];
        ++k;
    }
    if (k == 0) throw NotApplicable("V measure needs at least one violation");
    VMeasure out;
    out.v1 = s1 / static_cast<double>(k);
    out.v2 = s2 / static_cast<double>(k);
    out.v = out.v1 - out.v2;
    return out;
}

double rmse(std::span<const double> forecast, std::span<const double> truth) {
    check_same_length(forecast.size(), truth.size());
    if (forecast.empty()) throw InsufficientData("rmse of an empty sequence");
    double ss = 0.0;
    for (std::size_t t = 0; t < forecast.size(); ++t) ss += (forecast[t] - truth[t]) * (forecast[t] - truth[t]);
    return std::sqrt(ss / static_cast<double>(forecast.size()));
}

RegionErrors region_errors(std::span<const double> forecast, std::span<const double> truth, int regions) {
    check_same_length(forecast.size(), truth.size());
    if (regions < 2) throw DomainError("need at least two regions");
    const std::size_t n = truth.size(), R = static_cast<std::size_t>(regions);
    if (n < R) throw InsufficientData("fewer targets than regions");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return truth[a] < truth[b]; });

    std::vector<std::size_t> edge(R + 1);
    for (std::size_t b = 0; b <= R; ++b) edge[b] = b * n / R;
    for (std::size_t b = 1; b < R; ++b) {
        edge[b] = std::max(edge[b], edge[b - 1]);
        while (edge[b] > edge[b - 1] && edge[b] < n && truth[order[edge[b]]] == truth[order[edge[b] - 1]]) ++edge[b];
    }

    RegionErrors out;
    for (std::size_t b = 0; b < R; ++b) {
        const std::size_t lo = edge[b], hi = std::max(edge[b], edge[b + 1]);
        const std::size_t c = hi - lo;
        out.count.push_back(c);
        if (c == 0) {
            out.truth_low.push_back(kNaN);
            out.truth_high.push_back(kNaN);
            out.bias.push_back(kNaN);
            out.variance.push_back(kNaN);
            continue;
        }
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += forecast[order[i]] - truth[order[i]];
        const double mean = sum / static_cast<double>(c);
        double ss = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double e = forecast[order[i]] - truth[order[i]] - mean;
            ss += e * e;
        }
        out.truth_low.push_back(truth[order[lo]]);
        out.truth_high.push_back(truth[order[hi - 1]]);
        out.bias.push_back(mean);
        out.variance.push_back(c > 1 ? ss / static_cast<double>(c - 1) : kNaN);
    }
    return out;
}

BacktestReport backtest_stream(std::span<const ForecastRecord> records, const BacktestOptions& opt,
                               const SimPath* truth) {
    if (records.empty()) throw InsufficientData("no forecast records");
    BacktestReport rep;
    rep.model = records.front().model;
    rep.alpha = records.front().alpha;

    std::vector<double> loss, var, es, sigma;
    std::vector<std::size_t> t_index;
    const bool with_es = has_es(rep.model);
    for (const auto& r : records) {
        if (r.model != rep.model || r.alpha != rep.alpha) throw AlignmentError("records mix models or alphas");
        if ((r.flags & kWindowError) || !std::isfinite(r.var) || (with_es && !(r.es && std::isfinite(*r.es)))) {
            ++rep.skipped;
            continue;
        }
        loss.push_back(r.loss);
        var.push_back(r.var);
        if (with_es) es.push_back(*r.es);
        sigma.push_back(has_sigma(rep.model) ? r.sigma : 1.0);
        t_index.push_back(r.t);
    }
    if (loss.size() < 2) throw InsufficientData("fewer than two usable forecast records");

    const ViolationSeries v = violations(loss, var);
    rep.n = v.n;
    rep.x = v.x;
    rep.prop = static_cast<double>(v.x) / static_cast<double>(v.n);
    const LrTest uc = kupiec_uc(v.x, v.n, rep.alpha);
    const LrTest cc = christoffersen_cc(v, rep.alpha);
    rep.uc_lr = uc.lr;
    rep.uc_p = uc.p;
    rep.cc_lr = cc.lr;
    rep.cc_p = cc.p;

    if (with_es && v.x > 0) {
        const VMeasure vm = v_measure(loss, var, es);
        rep.v1 = vm.v1;
        rep.v2 = vm.v2;
        rep.v = vm.v;
        try {
            const auto r = exceedance_residuals(loss, var, es, sigma);
            rep.es_boot_p = es_bootstrap_test(r, opt.bootstrap_B, opt.seed);
        } catch (const Error&) {
            // Too few or degenerate residuals: the test is not applicable.
        }
    }

    if (truth) {
        const auto [tv, te] = true_var_es(*truth, rep.alpha);
        std::vector<double> tv_s, te_s;
        for (std::size_t t : t_index) {
            if (t >= tv.size()) throw AlignmentError("forecast target beyond the simulated path");
            tv_s.push_back(tv[t]);
            te_s.push_back(te[t]);
        }
        rep.rmse_var = rmse(var, tv_s);
        if (with_es) rep.rmse_es = rmse(es, te_s);
    }
    return rep;
}

std::vector<std::vector<ForecastRecord>> group_streams(std::span<const ForecastRecord> records) {
    std::vector<std::vector<ForecastRecord>> groups;
    for (const auto& r : records) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const std::vector<ForecastRecord>& g) {
            return g.front().model == r.model && g.front().alpha == r.alpha;
        });
        if (it == groups.end()) groups.push_back({r});
        else it->push_back(r);
    }
    return groups;
}

std::vector<BacktestReport> backtest_all(std::span<const ForecastRecord> records, const BacktestOptions& opt,
                                         const SimPath* truth) {
    std::vector<BacktestReport> out;
    for (const auto& g : group_streams(records)) out.push_back(backtest_stream(g, opt, truth));
    return out;
}

}  // namespace tailrisk
