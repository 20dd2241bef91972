#include "tailrisk/garch.hpp"

#include "tailrisk/errors.hpp"
#include "tailrisk/optimize.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace tailrisk {

namespace {

constexpr double kNuLow = 2.1;
constexpr double kNuHigh = 100.0;
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double demeaned_variance(std::span<const double> x, double mu) {
    double s = 0.0;
    for (double v : x) s += (v - mu) * (v - mu);
    return s / static_cast<double>(x.size());
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Log-likelihood kernel shared by fitting and filtering. Writes sigma2 when
// `sigma2_out` is non-null.
double garch_loglik_impl(std::span<const double> values, double mu, double var0, double omega, double alpha,
                         double beta, const std::optional<double>& nu, double* sigma2_out) {
    double s2 = var0;
    double ll = 0.0;
    double eps_prev = 0.0;
    if (!nu) {
        for (std::size_t t = 0; t < values.size(); ++t) {
            if (t > 0) s2 = omega + alpha * eps_prev * eps_prev + beta * s2;
            if (!(s2 > 0.0)) return -std::numeric_limits<double>::infinity();
            const double eps = values[t] - mu;
            ll += std::log(s2) + eps * eps / s2;
            if (sigma2_out) sigma2_out[t] = s2;
            eps_prev = eps;
        }
        return -0.5 * (ll + static_cast<double>(values.size()) * kLog2Pi);
    }
    const double v = *nu;
    const double log_norm =
        std::lgamma(0.5 * (v + 1.0)) - std::lgamma(0.5 * v) - 0.5 * std::log(std::numbers::pi * (v - 2.0));
    const double inv_nu2 = 1.0 / (v - 2.0);
    for (std::size_t t = 0; t < values.size(); ++t) {
        if (t > 0) s2 = omega + alpha * eps_prev * eps_prev + beta * s2;
        if (!(s2 > 0.0)) return -std::numeric_limits<double>::infinity();
        const double eps = values[t] - mu;
        ll += 0.5 * std::log(s2) + 0.5 * (v + 1.0) * std::log1p(eps * eps / s2 * inv_nu2);
        if (sigma2_out) sigma2_out[t] = s2;
        eps_prev = eps;
    }
    return static_cast<double>(values.size()) * log_norm - ll;
}

struct Unpacked {
    double omega, alpha, beta;
    std::optional<double> nu;
};

Unpacked unpack(const Eigen::VectorXd& theta, bool with_nu) {
    const double ea = std::exp(theta[1]);
    const double eb = std::exp(theta[2]);
    const double denom = 1.0 + ea + eb;
    Unpacked u{std::exp(theta[0]), ea / denom, eb / denom, std::nullopt};
    if (with_nu) u.nu = kNuLow + (kNuHigh - kNuLow) * logistic(theta[3]);
    return u;
}

}  // namespace

double garch_loglik(std::span<const double> values, const GarchParams& p) {
    if (values.empty()) throw InsufficientData("empty window");
    const double var0 = demeaned_variance(values, p.mu);
    return garch_loglik_impl(values, p.mu, var0, p.omega, p.alpha, p.beta, p.nu, nullptr);
}

FittedGarch filter_garch(std::span<const double> values, const GarchParams& params) {
    if (values.empty()) throw InsufficientData("empty window");
    FittedGarch fit;
    fit.params = params;
    fit.innovation = params.innovation();
    fit.sigma.resize(values.size());
    const double var0 = demeaned_variance(values, params.mu);
    fit.loglik = garch_loglik_impl(values, params.mu, var0, params.omega, params.alpha, params.beta, params.nu,
                                   fit.sigma.data());
    if (!std::isfinite(fit.loglik)) throw DomainError("variance recursion left the positive half-line");
    fit.std_residuals.resize(values.size());
    for (std::size_t t = 0; t < values.size(); ++t) {
        fit.sigma[t] = std::sqrt(fit.sigma[t]);
        fit.std_residuals[t] = (values[t] - params.mu) / fit.sigma[t];
    }
    return fit;
}

FittedGarch fit_garch(std::span<const double> values, DistKind innovation) {
    if (values.size() < 100) throw InsufficientData("GARCH fit needs at least 100 observations");
    const double mu = mean_of(values);
    const double var0 = demeaned_variance(values, mu);
    if (!(var0 > 0.0)) throw DomainError("GARCH fit needs a nonconstant window");

    const bool with_nu = innovation == DistKind::StandardizedT;
    const Eigen::Index dim = with_nu ? 4 : 3;
    auto negloglik = [&](const Eigen::VectorXd& theta) {
        const Unpacked u = unpack(theta, with_nu);
        return -garch_loglik_impl(values, mu, var0, u.omega, u.alpha, u.beta, u.nu, nullptr);
    };

    static constexpr std::array<std::array<double, 2>, 5> kStarts{
        {{0.05, 0.90}, {0.10, 0.85}, {0.02, 0.95}, {0.20, 0.70}, {0.05, 0.50}}};
    constexpr double kNuStart = 8.0;

    Eigen::VectorXd step = Eigen::VectorXd::Constant(dim, 0.5);
    step[0] = 1.0;
    NelderMeadOptions opt;
    opt.ftol = 1e-8;

    OptimResult best;
    bool any_converged = false;
    for (const auto& [a0, b0] : kStarts) {
        Eigen::VectorXd theta(dim);
        const double rest = 1.0 - a0 - b0;
        theta[0] = std::log(rest * var0);
        theta[1] = std::log(a0 / rest);
        theta[2] = std::log(b0 / rest);
        if (with_nu) theta[3] = -std::log((kNuHigh - kNuLow) / (kNuStart - kNuLow) - 1.0);
        const OptimResult r = nelder_mead(negloglik, theta, step, opt);
        any_converged = any_converged || r.converged;
        if (r.value < best.value) best = r;
    }

    const Unpacked u = unpack(best.x, with_nu);
    GarchParams params{u.omega, u.alpha, u.beta, mu, u.nu};
    if (!any_converged || !std::isfinite(best.value)) {
        std::vector<double> raw{u.omega, u.alpha, u.beta};
        if (u.nu) raw.push_back(*u.nu);
        throw FitError("GARCH likelihood optimizer did not converge from any start", std::move(raw), -best.value);
    }
    FittedGarch fit = filter_garch(values, params);
    fit.converged = true;
    return fit;
}

double forecast_sigma(const FittedGarch& fit, double last_loss) {
    const auto& p = fit.params;
    const double eps = last_loss - p.mu;
    const double s_last = fit.sigma.back();
    return std::sqrt(p.omega + p.alpha * eps * eps + p.beta * s_last * s_last);
}

std::vector<double> simulate_garch(const GarchParams& params, std::size_t n, std::uint64_t seed,
                                   std::size_t burn_in) {
    if (!params.valid()) throw DomainError("invalid GARCH parameters");
    Rng rng(seed);
    const Dist d = params.innovation();
    double s2 = params.omega / (1.0 - params.alpha - params.beta);
    double eps = 0.0;
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t t = 0; t < n + burn_in; ++t) {
        s2 = params.omega + params.alpha * eps * eps + params.beta * s2;
        eps = std::sqrt(s2) * rng.draw(d);
        if (t >= burn_in) out.push_back(params.mu + eps);
    }
    return out;
}

SimPath simulate_egarch(const EgarchParams& p, std::size_t n, std::uint64_t seed, std::span<const double> gamma,
                        std::uint64_t stream) {
    if (n < 2) throw DomainError("eGARCH simulation needs n >= 2");
    if (gamma.size() != n) throw AlignmentError("gamma profile length must equal n");
    if (!(std::abs(p.beta) < 1.0)) throw DomainError("eGARCH requires |beta| < 1");
    const Dist d = Dist::standardized_t(p.nu);
    const double abs_mean = abs_moment(d);

    Rng rng(seed, stream);
    SimPath path;
    path.nu = p.nu;
    path.losses.resize(n);
    path.sigma_true.resize(n);
    path.gamma.assign(gamma.begin(), gamma.end());
    path.z.resize(n);

    double log_s2 = p.omega / (1.0 - p.beta);
    for (std::size_t t = 0; t < n; ++t) {
        if (gamma[t] <= 0.0) throw DomainError("gamma profile values must be positive");
        if (t > 0) {
            const double zp = path.z[t - 1];
            log_s2 = p.omega + p.alpha * zp + p.gamma_coef * (std::abs(zp) - abs_mean) + p.beta * log_s2;
        }
        path.z[t] = rng.draw(d);
        const double sigma = std::exp(0.5 * log_s2);
        path.sigma_true[t] = gamma[t] * sigma;
        path.losses[t] = path.sigma_true[t] * path.z[t];
    }
    return path;
}

std::pair<double, double> standardized_t_var_es(double nu, double alpha_tail) {
    const Dist d = Dist::standardized_t(nu);
    const double s = d.t_scale();
    const double q_z = quantile(d, 1.0 - alpha_tail);
    const double q_c = q_z / s;
    // Upper tail mean of the classical t, rescaled to unit variance.
    const double es_c = student_t_pdf(q_c, nu) / alpha_tail * (nu + q_c * q_c) / (nu - 1.0);
    return {q_z, s * es_c};
}

std::pair<std::vector<double>, std::vector<double>> true_var_es(const SimPath& path, double alpha_tail) {
    if (!(alpha_tail > 0.0 && alpha_tail < 0.5)) throw DomainError("alpha_tail must lie in (0, 0.5)");
    const auto [q, es] = standardized_t_var_es(path.nu, alpha_tail);
    std::pair<std::vector<double>, std::vector<double>> out;
    out.first.resize(path.sigma_true.size());
    out.second.resize(path.sigma_true.size());
    for (std::size_t t = 0; t < path.sigma_true.size(); ++t) {
        out.first[t] = path.sigma_true[t] * q;
        out.second[t] = path.sigma_true[t] * es;
    }
    return out;
}

}  // namespace tailrisk
