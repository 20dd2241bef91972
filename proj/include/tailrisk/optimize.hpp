#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace tailrisk {

struct NelderMeadOptions {
    /// Converged when best and worst simplex values differ by less than this.
    double ftol = 1e-8;
    std::size_t max_evals = 4000;
    /// Fresh simplices built around the incumbent after convergence; stops
    /// early when a restart improves by less than ftol.
    int restarts = 2;
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = std::numeric_limits<double>::infinity();
    std::size_t evals = 0;
    bool converged = false;
};

/// Minimizes `f` by the Nelder-Mead simplex method. Non-finite function
/// values are treated as +infinity, so constraints can be expressed by
/// returning NaN or inf outside the feasible set.
template <typename F>
OptimResult nelder_mead(F&& f, const Eigen::VectorXd& x0, const Eigen::VectorXd& step,
                        const NelderMeadOptions& opt = {}) {
    const Eigen::Index n = x0.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    auto eval = [&](const Eigen::VectorXd& x, std::size_t& counter) {
        ++counter;
        const double v = f(x);
        return std::isfinite(v) ? v : inf;
    };

    OptimResult result;
    result.x = x0;
    result.value = eval(x0, result.evals);

    std::vector<Eigen::VectorXd> simplex(n + 1);
    std::vector<double> values(n + 1);
    std::vector<std::size_t> order(n + 1);

    for (int round = 0; round <= opt.restarts; ++round) {
        const double round_start = result.value;
        simplex[0] = result.x;
        values[0] = result.value;
        for (Eigen::Index i = 0; i < n; ++i) {
            simplex[i + 1] = result.x;
            simplex[i + 1][i] += step[i];
            values[i + 1] = eval(simplex[i + 1], result.evals);
        }
        bool converged = false;
        while (result.evals < opt.max_evals) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
            const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
            if (std::isfinite(values[worst]) && values[worst] - values[best] < opt.ftol) {
                converged = true;
                break;
            }
            Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
            for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[order[i]];
            centroid /= static_cast<double>(n);

            const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
            const double f_ref = eval(reflected, result.evals);
            if (f_ref < values[best]) {
                const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
                const double f_exp = eval(expanded, result.evals);
                if (f_exp < f_ref) {
                    simplex[worst] = expanded;
                    values[worst] = f_exp;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = f_ref;
                }
                continue;
            }
            if (f_ref < values[second]) {
                simplex[worst] = reflected;
                values[worst] = f_ref;
                continue;
            }
            const bool outside = f_ref < values[worst];
            const Eigen::VectorXd contracted =
                outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                        : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
            const double f_con = eval(contracted, result.evals);
            if (f_con < (outside ? f_ref : values[worst])) {
                simplex[worst] = contracted;
                values[worst] = f_con;
                continue;
            }
            for (Eigen::Index i = 1; i <= n; ++i) {
                const std::size_t k = order[i];
                simplex[k] = simplex[best] + 0.5 * (simplex[k] - simplex[best]);
                values[k] = eval(simplex[k], result.evals);
            }
        }
        const auto best_it = std::min_element(values.begin(), values.end());
        if (*best_it < result.value) {
            result.value = *best_it;
            result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
        }
        result.converged = converged;
        if (!converged) break;
        if (round > 0 && round_start - result.value < opt.ftol) break;
    }
    return result;
}

}  // namespace tailrisk
