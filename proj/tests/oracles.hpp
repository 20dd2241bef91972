#pragma once

// Reference computations that share no code with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

inline double bisect(const std::function<double(double)>& f, double target, double lo, double hi, int iters = 200) {
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Phi(x) = 1/2 + phi(x) sum x^(2k+1) / (2k+1)!!, all terms positive for x > 0.
inline double normal_cdf_series(double x) {
    if (x < 0.0) return 1.0 - normal_cdf_series(-x);
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    double term = x, sum = x;
    for (int k = 1; k < 500; ++k) {
        term *= x * x / (2.0 * k + 1.0);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return 0.5 + phi * sum;
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Regularized upper incomplete gamma Q(a, x): series below a + 1, Lentz continued fraction above.
inline double gamma_q(double a, double x) {
    if (x <= 0.0) return 1.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, del = 1.0 / a, sum = del;
        for (int n = 0; n < 10000; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-17) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-17) break;
    }
    return std::exp(-x + a * std::log(x) - lg) * h;
}

inline double chi2_sf(double x, double df) { return gamma_q(0.5 * df, 0.5 * x); }

inline double check(double r, double tau) { return r * (tau - (r <= 0.0 ? 1.0 : 0.0)); }

inline double qr_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                           const Eigen::VectorXd& b, double tau) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) s += w[i] * check(y[i] - X.row(i).dot(b), tau);
    return s;
}

// Minimum of the weighted check objective over every basic solution
// (p positively weighted rows interpolated exactly).
inline double qr_exhaustive(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double tau) {
    const Eigen::Index n = X.rows(), p = X.cols();
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n; ++i)
        if (w[i] > 0.0) rows.push_back(i);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> pick(rows.size(), 0);
    std::fill(pick.end() - p, pick.end(), 1);
    do {
        Eigen::MatrixXd A(p, p);
        Eigen::VectorXd b(p);
        Eigen::Index k = 0;
        for (std::size_t j = 0; j < rows.size(); ++j)
            if (pick[j]) {
                A.row(k) = X.row(rows[j]);
                b[k] = y[rows[j]];
                ++k;
            }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.rank() < p) continue;
        best = std::min(best, qr_objective(X, y, w, lu.solve(b), tau));
    } while (std::next_permutation(pick.begin(), pick.end()));
    return best;
}

// Lowest b minimizing sum w_i rho_tau(y_i - b): first sorted value whose
// cumulative weight reaches tau * W.
inline double weighted_quantile_sorted(std::vector<double> y, std::vector<double> w, double tau) {
    std::vector<std::size_t> idx(y.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b] || (y[a] == y[b] && a < b); });
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    double cum = 0.0;
    for (std::size_t i : idx) {
        if (w[i] <= 0.0) continue;
        cum += w[i];
        if (cum >= tau * total) return y[i];
    }
    return y[idx.back()];
}

inline double mean(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double sample_sd(const std::vector<double>& x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

// Unit-variance Student-t draws via the standard library.
inline std::vector<double> std_t_draws(double nu, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::student_t_distribution<double> t(nu);
    const double s = std::sqrt((nu - 2.0) / nu);
    std::vector<double> out(n);
    for (auto& v : out) v = s * t(gen);
    return out;
}

// Mean of the draws beyond their empirical (1 - alpha) quantile, and that quantile.
inline std::pair<double, double> mc_tail(std::vector<double> x, double alpha) {
    std::sort(x.begin(), x.end());
    const auto k = static_cast<std::size_t>(std::round(alpha * static_cast<double>(x.size())));
    const double q = x[x.size() - k];
    double s = 0.0;
    for (std::size_t i = x.size() - k; i < x.size(); ++i) s += x[i];
    return {q, s / static_cast<double>(k)};
}

}  // namespace oracle
