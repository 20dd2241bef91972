#include "tailrisk/evt.hpp"

#include "tailrisk/errors.hpp"
#include "tailrisk/optimize.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace tailrisk {

namespace {

constexpr double kZetaLow = -0.5;
constexpr double kZetaHigh = 0.99;

double to_zeta(double x) { return kZetaLow + (kZetaHigh - kZetaLow) / (1.0 + std::exp(-x)); }
double from_zeta(double z) { return -std::log((kZetaHigh - kZetaLow) / (z - kZetaLow) - 1.0); }

}  // namespace

double quantile_type7_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InsufficientData("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile probability must lie in [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

double quantile_type7(std::span<const double> values, double p) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_type7_sorted(sorted, p);
}

Threshold select_threshold(std::span<const double> residuals, double p_u) {
    if (residuals.size() < 100) throw InsufficientData("threshold selection needs at least 100 residuals");
    if (!(p_u > 0.5 && p_u < 1.0)) throw DomainError("threshold probability must lie in (0.5, 1)");
    Threshold th;
    th.u = quantile_type7(residuals, p_u);
    for (double r : residuals)
        if (r > th.u) th.exceedances.push_back(r - th.u);
    if (th.exceedances.size() < kMinExceedances) throw InsufficientTail("fewer than 10 exceedances over threshold");
    return th;
}

double gpd_loglik(std::span<const double> x, double zeta, double psi) {
    if (!(psi > 0.0)) return -std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(x.size());
    double ll = -n * std::log(psi);
    if (std::abs(zeta) < 1e-12) {
        for (double v : x) ll -= v / psi;
        return ll;
    }
    const double k = 1.0 + 1.0 / zeta;
    for (double v : x) {
        const double y = zeta * v / psi;
        if (!(y > -1.0)) return -std::numeric_limits<double>::infinity();
        ll -= k * std::log1p(y);
    }
    return ll;
}

GpdEstimate fit_gpd(std::span<const double> x) {
    if (x.size() < kMinExceedances) throw InsufficientTail("GPD fit needs at least 10 exceedances");
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    if (!(mean > 0.0)) throw DomainError("GPD excesses must be positive");

    auto neg = [&](const Eigen::VectorXd& th) { return -gpd_loglik(x, to_zeta(th[0]), std::exp(th[1])); };

    const Eigen::VectorXd step = Eigen::VectorXd::Constant(2, 0.3);
    NelderMeadOptions opt;
    opt.ftol = 1e-10;
    OptimResult best;
    bool converged = false;
    for (double z0 : {0.1, -0.2, 0.5}) {
        Eigen::VectorXd th(2);
        th[0] = from_zeta(z0);
        // Moment-style scale start: E[X] = psi / (1 - zeta).
        th[1] = std::log(mean * (1.0 - z0));
        const OptimResult r = nelder_mead(neg, th, step, opt);
        converged = converged || r.converged;
        if (r.value < best.value) best = r;
    }
    GpdEstimate est{to_zeta(best.x[0]), std::exp(best.x[1]), -best.value};
    if (!converged || !std::isfinite(best.value))
        throw FitError("GPD likelihood optimizer did not converge", {est.zeta, est.psi}, est.loglik);
    return est;
}

GpdFit fit_tail(std::span<const double> residuals, double p_u) {
    const Threshold th = select_threshold(residuals, p_u);
    const GpdEstimate est = fit_gpd(th.exceedances);
    return GpdFit{est.zeta, est.psi, th.u, residuals.size(), th.exceedances.size()};
}

double gpd_tail_quantile(const GpdFit& f, double alpha_tail) {
    if (f.n_exceed == 0 || f.n_exceed > f.n_total) throw DomainError("invalid exceedance counts");
    const double exceed_prob = static_cast<double>(f.n_exceed) / static_cast<double>(f.n_total);
    if (!(alpha_tail > 0.0) || alpha_tail > exceed_prob) throw TailError("tail level lies outside the modeled tail");
    // log of (n / N_u) * alpha; zero at the threshold itself.
    const double log_ratio = std::log(alpha_tail / exceed_prob);
    if (std::abs(f.zeta) < 1e-15) return f.u - f.psi * log_ratio;
    return f.u + f.psi / f.zeta * std::expm1(-f.zeta * log_ratio);
}

double gpd_tail_es(const GpdFit& f, double q_hat) {
    if (!(f.zeta < 1.0)) throw TailMeanUndefined("GPD tail mean requires zeta < 1");
    if (q_hat < f.u) throw DomainError("tail quantile lies below the threshold");
    return q_hat / (1.0 - f.zeta) + (f.psi - f.zeta * f.u) / (1.0 - f.zeta);
}

}  // namespace tailrisk
