#include "tailrisk/quantreg.hpp"

#include "tailrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tailrisk {

namespace {

using Eigen::Index;

struct Breakpoint {
    double s;
    Index row;
};

// Contribution to the slope of s -> w rho(r - s a) just after / before the
// kink at s = r / a.
double slope_after(double w, double a, double tau) { return w * std::abs(a) * (a > 0.0 ? 1.0 - tau : tau); }
double slope_before(double w, double a, double tau) { return -w * std::abs(a) * (a > 0.0 ? tau : 1.0 - tau); }

class Solver {
public:
    Solver(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double tau)
        : X_(X), y_(y), w_(w), tau_(tau), n_(X.rows()), p_(X.cols()) {
        resid_scale_ = 1e-13 * std::max(1.0, y_.cwiseAbs().maxCoeff());
    }

    QrFit solve(const std::vector<Index>* warm) {
        beta_ = Eigen::VectorXd::Zero(p_);
        basis_.clear();
        in_basis_.assign(static_cast<std::size_t>(n_), false);
        if (warm && try_warm(*warm)) {
            // seeded
        } else {
            beta_.setZero();
            basis_.clear();
            std::fill(in_basis_.begin(), in_basis_.end(), false);
            build_basis();
        }
        descend();
        QrFit fit;
        fit.beta = beta_;
        fit.tau = tau_;
        fit.objective = check_objective(X_, y_, w_, beta_, tau_);
        fit.basis = basis_;
        fit.pivots = pivots_;
        return fit;
    }

private:
    bool try_warm(const std::vector<Index>& warm) {
        if (static_cast<Index>(warm.size()) != p_) return false;
        Eigen::MatrixXd XB(p_, p_);
        Eigen::VectorXd yB(p_);
        for (Index k = 0; k < p_; ++k) {
            const Index i = warm[static_cast<std::size_t>(k)];
            if (i < 0 || i >= n_ || w_[i] <= 0.0 || in_basis_[static_cast<std::size_t>(i)]) return false;
            in_basis_[static_cast<std::size_t>(i)] = true;
            XB.row(k) = X_.row(i);
            yB[k] = y_[i];
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(XB);
        if (lu.rank() < p_) return false;
        beta_ = lu.solve(yB);
        basis_ = warm;
        return true;
    }

    // Exact minimization over the whole line beta + s d; returns the row that
    // becomes interpolated (lowest minimizer), or -1 when d is flat.
    Index line_minimize_full(const Eigen::VectorXd& d) {
        const Eigen::VectorXd a = X_ * d;
        const Eigen::VectorXd r = y_ - X_ * beta_;
        bps_.clear();
        double slope = 0.0;
        for (Index i = 0; i < n_; ++i) {
            if (w_[i] <= 0.0 || in_basis_[static_cast<std::size_t>(i)] || a[i] == 0.0) continue;
            bps_.push_back({r[i] / a[i], i});
            slope += slope_before(w_[i], a[i], tau_);
        }
        if (bps_.empty()) return -1;
        std::sort(bps_.begin(), bps_.end(), [](const Breakpoint& l, const Breakpoint& rr) {
            return l.s < rr.s || (l.s == rr.s && l.row < rr.row);
        });
        for (const auto& bp : bps_) {
            slope += w_[bp.row] * std::abs(a[bp.row]);
            if (slope >= 0.0) {
                beta_ += bp.s * d;
                return bp.row;
            }
        }
        return -1;
    }

    void build_basis() {
        for (Index k = 0; k < p_; ++k) {
            Eigen::VectorXd d;
            if (basis_.empty()) {
                d = Eigen::VectorXd::Unit(p_, 0);
            } else {
                Eigen::MatrixXd XB(static_cast<Index>(basis_.size()), p_);
                for (std::size_t j = 0; j < basis_.size(); ++j) XB.row(static_cast<Index>(j)) = X_.row(basis_[j]);
                Eigen::FullPivLU<Eigen::MatrixXd> lu(XB);
                const Eigen::MatrixXd kernel = lu.kernel();
                d = kernel.col(0);
            }
            const Index row = line_minimize_full(d);
            if (row < 0) throw SingularDesign("design is rank deficient on the weighted rows");
            basis_.push_back(row);
            in_basis_[static_cast<std::size_t>(row)] = true;
        }
    }

    void descend() {
        const int max_pivots = static_cast<int>(20 * n_ + 100);
        Eigen::MatrixXd XB(p_, p_);
        while (pivots_ < max_pivots) {
            for (Index k = 0; k < p_; ++k) XB.row(k) = X_.row(basis_[static_cast<std::size_t>(k)]);
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(XB);
            const Eigen::MatrixXd D = lu.inverse();
            // Re-anchor beta on the basis to stop drift across pivots.
            Eigen::VectorXd yB(p_);
            for (Index k = 0; k < p_; ++k) yB[k] = y_[basis_[static_cast<std::size_t>(k)]];
            beta_ = D * yB;

            const Eigen::VectorXd r = y_ - X_ * beta_;
            const Eigen::MatrixXd A = X_ * D;

            double best_g = 0.0;
            Index best_k = -1;
            double best_sign = 0.0;
            for (Index k = 0; k < p_; ++k) {
                const Index leaving = basis_[static_cast<std::size_t>(k)];
                for (double sign : {1.0, -1.0}) {
                    double g = slope_after(w_[leaving], sign, tau_);
                    double scale = w_[leaving];
                    for (Index i = 0; i < n_; ++i) {
                        if (in_basis_[static_cast<std::size_t>(i)] || w_[i] <= 0.0) continue;
                        const double a = sign * A(i, k);
                        if (a == 0.0) continue;
                        scale += w_[i] * std::abs(a);
                        const double ri = r[i];
                        if (std::abs(ri) <= resid_scale_) g += slope_after(w_[i], a, tau_);
                        else if (ri > 0.0) g -= a * tau_ * w_[i];
                        else g += a * (1.0 - tau_) * w_[i];
                    }
                    if (g < -1e-12 * scale && g < best_g) {
                        best_g = g;
                        best_k = k;
                        best_sign = sign;
                    }
                }
            }
            if (best_k < 0) return;

            const Eigen::VectorXd d = best_sign * D.col(best_k);
            const Index leaving = basis_[static_cast<std::size_t>(best_k)];
            bps_.clear();
            for (Index i = 0; i < n_; ++i) {
                if (in_basis_[static_cast<std::size_t>(i)] || w_[i] <= 0.0) continue;
                const double a = best_sign * A(i, best_k);
                if (a == 0.0 || std::abs(r[i]) <= resid_scale_) continue;
                const double s = r[i] / a;
                if (s > 0.0) bps_.push_back({s, i});
            }
            std::sort(bps_.begin(), bps_.end(), [](const Breakpoint& l, const Breakpoint& rr) {
                return l.s < rr.s || (l.s == rr.s && l.row < rr.row);
            });
            double slope = best_g;
            Index entering = -1;
            double step = 0.0;
            for (const auto& bp : bps_) {
                slope += w_[bp.row] * std::abs(best_sign * A(bp.row, best_k));
                if (slope >= 0.0) {
                    entering = bp.row;
                    step = bp.s;
                    break;
                }
            }
            if (entering < 0) throw DomainError("quantile regression objective is unbounded");
            beta_ += step * d;
            in_basis_[static_cast<std::size_t>(leaving)] = false;
            in_basis_[static_cast<std::size_t>(entering)] = true;
            basis_[static_cast<std::size_t>(best_k)] = entering;
            ++pivots_;
        }
    }

    const Eigen::MatrixXd& X_;
    const Eigen::VectorXd& y_;
    const Eigen::VectorXd& w_;
    double tau_;
    Index n_, p_;
    double resid_scale_ = 0.0;
    Eigen::VectorXd beta_;
    std::vector<Index> basis_;
    std::vector<bool> in_basis_;
    std::vector<Breakpoint> bps_;
    int pivots_ = 0;
};

}  // namespace

double check_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                       const Eigen::VectorXd& beta, double tau) {
    const Eigen::VectorXd r = y - X * beta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) total += w[i] * check_loss(r[i], tau);
    return total;
}

double weighted_quantile_lower(std::span<const double> y, std::span<const double> w, double tau) {
    if (y.size() != w.size()) throw AlignmentError("values and weights differ in length");
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    double total = 0.0;
    for (std::size_t i : order) total += w[i];
    if (!(total > 0.0)) throw DegenerateWeights("all weights are zero");
    const double target = tau * total;
    double cum = 0.0;
    for (std::size_t i : order) {
        cum += w[i];
        if (w[i] > 0.0 && cum >= target) return y[i];
    }
    return y[order.back()];
}

QrFit weighted_linear_qr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double tau,
                         const std::vector<Eigen::Index>* warm_basis) {
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("tau must lie in (0, 1)");
    if (X.rows() != y.size() || X.rows() != w.size()) throw AlignmentError("design, response and weights differ in length");
    if (X.cols() < 1) throw SingularDesign("design has no columns");
    if (X.rows() < X.cols() + 5) throw InsufficientData("quantile regression needs rows >= columns + 5");
    if ((w.array() < 0.0).any() || !w.allFinite()) throw DomainError("weights must be finite and nonnegative");
    if (!(w.sum() > 0.0)) throw DegenerateWeights("all weights are zero");

    if (X.cols() == 1) {
        // Intercept-like single column: scale the problem onto the responses.
        std::vector<double> ratio, wt;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            if (w[i] <= 0.0) continue;
            if (X(i, 0) == 0.0) continue;
            ratio.push_back(y[i] / X(i, 0));
            wt.push_back(w[i] * std::abs(X(i, 0)));
        }
        if (ratio.empty()) throw SingularDesign("design column is zero on the weighted rows");
        const bool constant_one = (X.col(0).array() == 1.0).all();
        if (constant_one) {
            QrFit fit;
            fit.beta = Eigen::VectorXd::Constant(1, weighted_quantile_lower(ratio, wt, tau));
            fit.tau = tau;
            fit.objective = check_objective(X, y, w, fit.beta, tau);
            for (Eigen::Index i = 0; i < X.rows(); ++i)
                if (w[i] > 0.0 && y[i] == fit.beta[0]) {
                    fit.basis.push_back(i);
                    break;
                }
            return fit;
        }
    }

    {
        std::vector<Eigen::Index> rows;
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            if (w[i] > 0.0) rows.push_back(i);
        Eigen::MatrixXd Xw(static_cast<Eigen::Index>(rows.size()), X.cols());
        for (std::size_t j = 0; j < rows.size(); ++j) Xw.row(static_cast<Eigen::Index>(j)) = X.row(rows[j]);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xw);
        if (qr.rank() < X.cols()) throw SingularDesign("design is rank deficient on the weighted rows");
    }

    Solver solver(X, y, w, tau);
    return solver.solve(warm_basis);
}

double qar1_forecast(std::span<const double> window, double alpha_tail) {
    if (window.size() < 30) throw InsufficientData("QAR(1) needs at least 30 observations");
    if (!(alpha_tail > 0.0 && alpha_tail < 1.0)) throw DomainError("alpha_tail must lie in (0, 1)");
    const Eigen::Index m = static_cast<Eigen::Index>(window.size()) - 1;
    Eigen::VectorXd y(m), w = Eigen::VectorXd::Ones(m);
    Eigen::MatrixXd X(m, 2);
    bool constant_predictor = true;
    for (Eigen::Index i = 0; i < m; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = window[static_cast<std::size_t>(i)];
        y[i] = window[static_cast<std::size_t>(i) + 1];
        constant_predictor = constant_predictor && X(i, 1) == X(0, 1);
    }
    const double tau = 1.0 - alpha_tail;
    if (constant_predictor) return weighted_linear_qr(X.leftCols(1), y, w, tau).beta[0];
    const QrFit fit = weighted_linear_qr(X, y, w, tau);
    return fit.beta[0] + fit.beta[1] * window.back();
}

}  // namespace tailrisk
