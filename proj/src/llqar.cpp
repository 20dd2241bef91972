#include "tailrisk/llqar.hpp"

#include "tailrisk/dist.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/evt.hpp"
#include "tailrisk/quantreg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tailrisk {

namespace {

constexpr double kMinWeightSum = 1e-12;

struct Regression {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

// Pairs (window[j], window[j+1]) with the predictor centered at `center`.
Regression lagged_design(std::span<const double> window, double center) {
    const Eigen::Index m = static_cast<Eigen::Index>(window.size()) - 1;
    Regression r{Eigen::MatrixXd(m, 2), Eigen::VectorXd(m)};
    for (Eigen::Index j = 0; j < m; ++j) {
        r.X(j, 0) = 1.0;
        r.X(j, 1) = window[static_cast<std::size_t>(j)] - center;
        r.y[j] = window[static_cast<std::size_t>(j) + 1];
    }
    return r;
}

bool slope_identified(const Eigen::MatrixXd& X, const Eigen::VectorXd& w) {
    double first = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if (w[i] <= 0.0) continue;
        if (std::isnan(first)) first = X(i, 1);
        else if (X(i, 1) != first) return true;
    }
    return false;
}

// Intercept of the local fit; drops to the intercept-only fit when the
// positively weighted predictors are all equal.
QrFit local_fit(const Regression& r, const Eigen::VectorXd& w, double tau, const std::vector<Eigen::Index>* warm) {
    if (!slope_identified(r.X, w)) return weighted_linear_qr(r.X.leftCols(1), r.y, w, tau);
    const bool usable = warm && warm->size() == 2;
    return weighted_linear_qr(r.X, r.y, w, tau, usable ? warm : nullptr);
}

void check_level(double alpha_tail) {
    if (!(alpha_tail > 0.0 && alpha_tail < 1.0)) throw DomainError("alpha_tail must lie in (0, 1)");
}

void check_window(std::span<const double> window, std::size_t min_len) {
    if (window.size() < min_len) throw InsufficientData("LLQAR window too short");
    for (double v : window)
        if (!std::isfinite(v)) throw DomainError("window contains non-finite values");
}

Eigen::VectorXd kernel_weights(std::span<const double> u, double h) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(u.size()));
    for (std::size_t i = 0; i < u.size(); ++i) w[static_cast<Eigen::Index>(i)] = gaussian_kernel(u[i] / h);
    return w;
}

std::size_t level_index(const std::vector<double>& levels, double a) {
    const auto it = std::find(levels.begin(), levels.end(), a);
    if (it == levels.end()) throw DomainError("level not on the quantile ladder");
    return static_cast<std::size_t>(it - levels.begin());
}

}  // namespace

std::string_view to_string(BandwidthRule rule) {
    switch (rule) {
        case BandwidthRule::RuleOfThumbIQR: return "RuleOfThumbIQR";
        case BandwidthRule::QCV: return "QCV";
        case BandwidthRule::Fixed: return "Fixed";
    }
    return "?";
}

BandwidthRule parse_bandwidth_rule(std::string_view name) {
    if (name == "RuleOfThumbIQR" || name == "rot") return BandwidthRule::RuleOfThumbIQR;
    if (name == "QCV" || name == "qcv") return BandwidthRule::QCV;
    if (name == "Fixed" || name == "fixed") return BandwidthRule::Fixed;
    throw ConfigError("unknown bandwidth rule: " + std::string(name));
}

std::vector<double> LlqarConfig::default_qcv_grid() {
    std::vector<double> grid;
    for (int k = 1; k <= 19; ++k) grid.push_back(k / 20.0);
    return grid;
}

void LlqarConfig::validate() const {
    if (es_sublevels < 5) throw ConfigError("llqar.es_sublevels must be at least 5");
    if (bandwidth_rule == BandwidthRule::Fixed && !(fixed_h && *fixed_h > 0.0))
        throw ConfigError("Fixed bandwidth rule needs llqar.fixed_h > 0");
    if (fixed_h && !(*fixed_h > 0.0)) throw ConfigError("llqar.fixed_h must be positive");
    if (qcv_grid.empty()) throw ConfigError("llqar.qcv_grid is empty");
    for (double q : qcv_grid)
        if (!(q > 0.0 && q < 1.0)) throw ConfigError("llqar.qcv_grid entries must lie in (0, 1)");
}

std::vector<double> llqar_scaled_distances(std::span<const double> window, double L) {
    if (window.size() < 2) throw InsufficientData("scaled distances need at least two observations");
    const std::size_t W = window.size();
    const double denom = static_cast<double>(W - 1);
    std::vector<double> u(W - 1);
    for (std::size_t j = 0; j + 1 < W; ++j) u[j] = (window[j] - L) * static_cast<double>(W - 1 - j) / denom;
    return u;
}

LlqarWeights llqar_weights(std::span<const double> window, double h) {
    if (!(h > 0.0)) throw DomainError("bandwidth must be positive");
    LlqarWeights out;
    out.u = llqar_scaled_distances(window, window.back());
    out.h = h;
    out.w.resize(out.u.size());
    for (std::size_t i = 0; i < out.u.size(); ++i) out.w[i] = gaussian_kernel(out.u[i] / h);
    return out;
}

double rot_bandwidth(std::span<const double> u) {
    if (u.empty()) throw DegenerateBandwidth("no distances");
    std::vector<double> a(u.size());
    std::transform(u.begin(), u.end(), a.begin(), [](double v) { return std::abs(v); });
    std::sort(a.begin(), a.end());
    const double iqr = quantile_type7_sorted(a, 0.75) - quantile_type7_sorted(a, 0.25);
    const double n = static_cast<double>(a.size());
    if (iqr > 0.0) return std::pow(4.0 / (3.0 * n), 0.2) * iqr;
    const double fallback = 0.1 * a.back();
    if (!(fallback > 0.0)) throw DegenerateBandwidth("all scaled distances are zero");
    return fallback;
}

QcvResult qcv_bandwidth(std::span<const double> window, double alpha_tail, std::span<const double> grid) {
    check_window(window, 100);
    check_level(alpha_tail);
    if (grid.empty()) throw DomainError("QCV grid is empty");

    const std::size_t W = window.size();
    const double tau = 1.0 - alpha_tail;
    std::vector<double> absu = llqar_scaled_distances(window, window.back());
    for (double& v : absu) v = std::abs(v);
    std::sort(absu.begin(), absu.end());

    QcvResult res;
    res.grid.assign(grid.begin(), grid.end());
    res.cv.assign(grid.size(), std::numeric_limits<double>::infinity());

    const std::size_t m = W - 1;
    // Per held-out pair: design centered at its predictor, distances in the
    // same lag units as the forecasting weights.
    std::vector<Regression> designs;
    std::vector<std::vector<double>> dists;
    for (std::size_t j = 1; j + 1 < m; ++j) {
        designs.push_back(lagged_design(window, window[j]));
        dists.push_back(llqar_scaled_distances(window, window[j]));
    }

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (!(grid[g] > 0.0 && grid[g] < 1.0)) throw DomainError("QCV grid entries must lie in (0, 1)");
        const double h = quantile_type7_sorted(absu, grid[g]);
        if (!(h > 0.0)) continue;
        double total = 0.0;
        std::vector<Eigen::Index> warm;
        for (std::size_t k = 0; k < designs.size(); ++k) {
            const std::size_t j = k + 1;
            Eigen::VectorXd w = kernel_weights(dists[k], h);
            w[static_cast<Eigen::Index>(j)] = 0.0;
            if (w.sum() < kMinWeightSum) {
                w.setOnes();
                w[static_cast<Eigen::Index>(j)] = 0.0;
            }
            const QrFit fit = local_fit(designs[k], w, tau, &warm);
            warm = fit.basis;
            total += check_loss(window[j + 1] - fit.beta[0], tau);
        }
        res.cv[g] = total;
        if (total < best) {
            best = total;
            res.q_opt = grid[g];
            res.h = h;
        }
    }
    if (!std::isfinite(best)) throw DegenerateBandwidth("every QCV candidate bandwidth is zero");
    return res;
}

double llqar_var(std::span<const double> window, double alpha_tail, double h) {
    check_window(window, 30);
    check_level(alpha_tail);
    if (!(h > 0.0)) throw DomainError("bandwidth must be positive");
    const Regression r = lagged_design(window, window.back());
    const Eigen::VectorXd w = kernel_weights(llqar_scaled_distances(window, window.back()), h);
    if (w.sum() < kMinWeightSum) throw DegenerateWeights("kernel weights underflow");
    return local_fit(r, w, 1.0 - alpha_tail, nullptr).beta[0];
}

std::vector<double> es_sublevels(double alpha_tail, int K) {
    if (K < 1) throw DomainError("ES needs at least one sublevel");
    std::vector<double> out(static_cast<std::size_t>(K));
    for (int j = 1; j <= K; ++j) out[static_cast<std::size_t>(j - 1)] = alpha_tail * (j - 0.5) / K;
    return out;
}

LlqarCurve llqar_curve(std::span<const double> window, std::span<const double> levels, double h) {
    check_window(window, 30);
    if (!(h > 0.0)) throw DomainError("bandwidth must be positive");
    LlqarCurve c;
    c.levels.assign(levels.begin(), levels.end());
    for (double a : c.levels) check_level(a);
    std::sort(c.levels.begin(), c.levels.end(), std::greater<>());
    c.levels.erase(std::unique(c.levels.begin(), c.levels.end()), c.levels.end());

    const Regression r = lagged_design(window, window.back());
    Eigen::VectorXd w = kernel_weights(llqar_scaled_distances(window, window.back()), h);
    if (w.sum() < kMinWeightSum) {
        w.setOnes();
        c.weight_fallback = true;
    }

    std::vector<Eigen::Index> warm;
    c.raw.reserve(c.levels.size());
    c.repaired.reserve(c.levels.size());
    for (double a : c.levels) {
        const QrFit fit = local_fit(r, w, 1.0 - a, &warm);
        warm = fit.basis;
        c.raw.push_back(fit.beta[0]);
        if (!c.repaired.empty() && c.repaired.back() > fit.beta[0]) {
            c.repaired.push_back(c.repaired.back());
            ++c.crossings;
        } else {
            c.repaired.push_back(fit.beta[0]);
        }
    }
    return c;
}

std::vector<double> llqar_ladder(std::span<const double> alphas, int K) {
    std::vector<double> levels;
    for (double a : alphas) {
        check_level(a);
        levels.push_back(a);
        for (double s : es_sublevels(a, K)) levels.push_back(s);
    }
    return levels;
}

LlqarForecast llqar_read(const LlqarCurve& c, double alpha_tail, int K) {
    LlqarForecast f;
    f.weight_fallback = c.weight_fallback;
    f.var = c.repaired[level_index(c.levels, alpha_tail)];
    // summing excesses keeps es >= var under rounding
    double excess = 0.0;
    for (double a : es_sublevels(alpha_tail, K)) excess += c.repaired[level_index(c.levels, a)] - f.var;
    f.es = f.var + excess / K;
    return f;
}

double llqar_es(std::span<const double> window, double alpha_tail, double h, int K) {
    check_level(alpha_tail);
    std::vector<double> levels = es_sublevels(alpha_tail, K);
    levels.push_back(alpha_tail);
    const LlqarCurve c = llqar_curve(window, levels, h);
    if (c.weight_fallback) throw DegenerateWeights("kernel weights underflow");
    return llqar_read(c, alpha_tail, K).es;
}

LlqarForecast llqar_forecast(std::span<const double> window, double alpha_tail, double h, int K,
                             std::span<const double> reference_alphas) {
    std::vector<double> alphas(reference_alphas.begin(), reference_alphas.end());
    alphas.push_back(alpha_tail);
    return llqar_read(llqar_curve(window, llqar_ladder(alphas, K), h), alpha_tail, K);
}

double hall_sheather_bandwidth(std::size_t n, double tau) {
    check_level(tau);
    const Dist N = Dist::normal();
    const double x = quantile(N, tau);
    const double z = quantile(N, 1.0 - tau / 2.0);
    const double phi = pdf(N, x);
    return std::pow(static_cast<double>(n), -0.5) * std::pow(z, 2.0 / 3.0) *
           std::cbrt(1.5 * phi * phi / (2.0 * x * x + 1.0));
}

double bofinger_bandwidth(std::size_t n, double tau) {
    check_level(tau);
    const Dist N = Dist::normal();
    const double x = quantile(N, tau);
    const double phi = pdf(N, x);
    const double d = 2.0 * x * x + 1.0;
    return std::pow(static_cast<double>(n), -0.2) * std::pow(4.5 * std::pow(phi, 4) / (d * d), 0.2);
}

double yu_jones_bandwidth(double h_mean, double tau) {
    check_level(tau);
    if (!(h_mean > 0.0)) throw DomainError("h_mean must be positive");
    const Dist N = Dist::normal();
    const double phi = pdf(N, quantile(N, tau));
    return h_mean * std::pow(tau * (1.0 - tau) / (phi * phi), 0.2);
}

}  // namespace tailrisk
