#include "tailrisk/caviar.hpp"

#include "tailrisk/dist.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/evt.hpp"
#include "tailrisk/optimize.hpp"
#include "tailrisk/quantreg.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace tailrisk {

std::string_view to_string(CaviarSpec spec) {
    switch (spec) {
        case CaviarSpec::SAV: return "SAV";
        case CaviarSpec::AS: return "AS";
        case CaviarSpec::IndirectGarch: return "IG";
        case CaviarSpec::Adaptive: return "Adaptive";
    }
    return "?";
}

std::size_t caviar_param_count(CaviarSpec spec) {
    switch (spec) {
        case CaviarSpec::SAV: return 3;
        case CaviarSpec::AS: return 4;
        case CaviarSpec::IndirectGarch: return 3;
        case CaviarSpec::Adaptive: return 1;
    }
    return 0;
}

double caviar_step(CaviarSpec spec, std::span<const double> b, double G, double alpha_tail, double q, double y) {
    switch (spec) {
        case CaviarSpec::SAV: return b[0] + b[1] * q + b[2] * std::abs(y);
        case CaviarSpec::AS: return b[0] + b[1] * q + b[2] * std::max(y, 0.0) - b[3] * std::min(y, 0.0);
        case CaviarSpec::IndirectGarch: {
            const double radicand = b[0] + b[1] * q * q + b[2] * y * y;
            return radicand >= 0.0 ? std::sqrt(radicand) : std::numeric_limits<double>::quiet_NaN();
        }
        case CaviarSpec::Adaptive: {
            const double hit = 1.0 / (1.0 + std::exp(G * (y - q)));
            return q + b[0] * (hit - (1.0 - alpha_tail));
        }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

bool caviar_path(CaviarSpec spec, std::span<const double> beta, double G, double alpha_tail, double q1,
                 std::span<const double> window, std::vector<double>& path) {
    path.resize(window.size());
    if (window.empty()) return true;
    path[0] = q1;
    for (std::size_t t = 1; t < window.size(); ++t) {
        path[t] = caviar_step(spec, beta, G, alpha_tail, path[t - 1], window[t - 1]);
        if (!std::isfinite(path[t])) return false;
    }
    return true;
}

CaviarFit caviar_fit(std::span<const double> window, CaviarSpec spec, double alpha_tail, const CaviarOptions& opt) {
    if (window.size() < 100) throw InsufficientData("CAViaR fit needs at least 100 observations");
    if (!(alpha_tail > 0.0 && alpha_tail < 1.0)) throw DomainError("alpha_tail must lie in (0, 1)");
    if (!(opt.G > 0.0)) throw DomainError("Adaptive G must be positive");

    const double n = static_cast<double>(window.size());
    const double mean = std::accumulate(window.begin(), window.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : window) ss += (v - mean) * (v - mean);
    double scale = std::sqrt(ss / (n - 1.0));
    if (!(scale > 0.0)) scale = 1.0;

    std::vector<double> z(window.size());
    for (std::size_t t = 0; t < window.size(); ++t) z[t] = window[t] / scale;
    const double tau = 1.0 - alpha_tail;
    const double q1 = quantile_type7(z, tau);
    const std::size_t dim = caviar_param_count(spec);

    std::vector<double> path;
    auto objective = [&](const Eigen::VectorXd& b) {
        std::span<const double> beta(b.data(), dim);
        if (!caviar_path(spec, beta, opt.G, alpha_tail, q1, z, path)) return std::numeric_limits<double>::infinity();
        double total = 0.0;
        for (std::size_t t = 0; t < z.size(); ++t) total += check_loss(z[t] - path[t], tau);
        return total;
    };

    // Constant-quantile start: the recursion reproduces q1 forever.
    Eigen::VectorXd flat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    switch (spec) {
        case CaviarSpec::SAV:
        case CaviarSpec::AS:
            flat[0] = 0.1 * q1;
            flat[1] = 0.9;
            break;
        case CaviarSpec::IndirectGarch:
            flat[0] = 0.1 * q1 * q1;
            flat[1] = 0.9;
            break;
        case CaviarSpec::Adaptive: break;
    }

    Rng rng(opt.seed, static_cast<std::uint64_t>(spec));
    std::vector<Eigen::VectorXd> starts{flat};
    for (int k = 0; k < opt.starts; ++k) {
        Eigen::VectorXd s(static_cast<Eigen::Index>(dim));
        for (std::size_t j = 0; j < dim; ++j) {
            const bool persistence = spec != CaviarSpec::Adaptive && j == 1;
            s[static_cast<Eigen::Index>(j)] = persistence ? 0.99 * rng.uniform() : 2.0 * rng.uniform() - 1.0;
        }
        starts.push_back(std::move(s));
    }

    const Eigen::VectorXd step = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), 0.1);
    NelderMeadOptions nm;
    nm.ftol = 1e-9;
    nm.max_evals = 2000;
    nm.restarts = 1;
    OptimResult best;
    bool converged = false;
    for (const auto& s : starts) {
        const OptimResult r = nelder_mead(objective, s, step, nm);
        converged = converged || r.converged;
        if (r.value < best.value) best = r;
    }

    CaviarFit fit;
    fit.spec = spec;
    fit.alpha_tail = alpha_tail;
    fit.beta.assign(best.x.data(), best.x.data() + dim);
    switch (spec) {
        case CaviarSpec::SAV:
        case CaviarSpec::AS: fit.beta[0] *= scale; break;
        case CaviarSpec::IndirectGarch: fit.beta[0] *= scale * scale; break;
        case CaviarSpec::Adaptive:
            fit.beta[0] *= scale;
            fit.G = opt.G / scale;
            break;
    }
    if (!converged || !std::isfinite(best.value))
        throw FitError("CAViaR optimizer did not converge from any start", fit.beta, best.value * scale);

    if (!caviar_path(spec, fit.beta, fit.G, alpha_tail, q1 * scale, window, fit.quantile_path))
        throw FitError("CAViaR path left the valid region on the raw scale", fit.beta, best.value * scale);
    fit.objective = 0.0;
    for (std::size_t t = 0; t < window.size(); ++t) fit.objective += check_loss(window[t] - fit.quantile_path[t], tau);
    return fit;
}

double caviar_forecast(const CaviarFit& fit, double last_loss) {
    if (fit.quantile_path.empty()) throw ForecastError("CAViaR fit has no quantile path");
    const double q = caviar_step(fit.spec, fit.beta, fit.G, fit.alpha_tail, fit.quantile_path.back(), last_loss);
    if (!std::isfinite(q)) throw ForecastError("negative radicand in the indirect GARCH recursion");
    return q;
}

}  // namespace tailrisk
