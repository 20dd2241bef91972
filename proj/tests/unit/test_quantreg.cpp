#include "doctest.h"
#include "oracles.hpp"

#include "tailrisk/dist.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/evt.hpp"
#include "tailrisk/quantreg.hpp"

#include <cmath>

using namespace tailrisk;

TEST_SUITE("quantreg") {

TEST_CASE("check loss") {
    CHECK(check_loss(1.0, 0.5) == 0.5);
    CHECK(check_loss(-1.0, 0.5) == 0.5);
    CHECK(check_loss(0.0, 0.3) == 0.0);
    CHECK(check_loss(-2.0, 0.05) == doctest::Approx(1.9));
    CHECK(check_loss(2.0, 0.05) == doctest::Approx(0.1));
}

TEST_CASE("matches the exhaustive vertex oracle") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int inst = 0; inst < 40; ++inst) {
        const int p = 1 + inst % 3;
        const int n = p + 5 + inst % 4;
        Eigen::MatrixXd X(n, p);
        Eigen::VectorXd y(n), w(n);
        for (int i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            for (int j = 1; j < p; ++j) X(i, j) = U(gen) * 4 - 2;
            y[i] = U(gen) * 3 - 1 + (p > 1 ? X(i, 1) : 0.0);
            w[i] = U(gen) < 0.2 ? 0.0 : U(gen) + 0.1;
        }
        w[0] = 1.0;
        const double tau = 0.05 + 0.9 * U(gen);
        QrFit fit;
        try {
            fit = weighted_linear_qr(X, y, w, tau);
        } catch (const SingularDesign&) {
            continue;
        }
        const double best = oracle::qr_exhaustive(X, y, w, tau);
        CHECK(fit.objective <= best * (1.0 + 1e-6) + 1e-12);
        CHECK(oracle::qr_objective(X, y, w, fit.beta, tau) == doctest::Approx(fit.objective).epsilon(1e-9));
    }
}

TEST_CASE("intercept only equals the weighted quantile") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int inst = 0; inst < 30; ++inst) {
        const int n = 8 + inst;
        std::vector<double> yv(n), wv(n);
        for (int i = 0; i < n; ++i) {
            yv[i] = std::round(U(gen) * 6);  // ties on purpose
            wv[i] = inst % 2 ? 1.0 : std::round(U(gen) * 3);
        }
        wv[0] = 1.0;
        const double tau = 0.1 + 0.8 * U(gen);
        const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
        const Eigen::VectorXd y = Eigen::Map<Eigen::VectorXd>(yv.data(), n);
        const Eigen::VectorXd w = Eigen::Map<Eigen::VectorXd>(wv.data(), n);
        const double expect = oracle::weighted_quantile_sorted(yv, wv, tau);
        CHECK(weighted_linear_qr(X, y, w, tau).beta[0] == expect);
        CHECK(weighted_quantile_lower(yv, wv, tau) == expect);
    }
}

TEST_CASE("doubled weights equal duplicated rows") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> N(0.0, 1.0);
    const int n = 20;
    Eigen::MatrixXd X(n, 2), X3(3 * n, 2);
    Eigen::VectorXd y(n), y3(3 * n), w(n), w3(3 * n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = N(gen);
        y[i] = 0.5 * X(i, 1) + N(gen);
        w[i] = 3.0;
        for (int k = 0; k < 3; ++k) {
            X3.row(3 * i + k) = X.row(i);
            y3[3 * i + k] = y[i];
            w3[3 * i + k] = 1.0;
        }
    }
    const auto a = weighted_linear_qr(X, y, w, 0.8);
    const auto b = weighted_linear_qr(X3, y3, w3, 0.8);
    CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-10));
    CHECK((a.beta - b.beta).norm() < 1e-8);
}

TEST_CASE("exact fit data") {
    const int n = 12;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n), w = Eigen::VectorXd::Ones(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = i * 0.5 - 1.0;
        y[i] = 2.0 + 3.0 * X(i, 1);
    }
    for (double tau : {0.05, 0.5, 0.95}) {
        const auto fit = weighted_linear_qr(X, y, w, tau);
        CHECK(fit.beta[0] == doctest::Approx(2.0));
        CHECK(fit.beta[1] == doctest::Approx(3.0));
        CHECK(fit.objective == doctest::Approx(0.0));
    }
}

TEST_CASE("errors") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(10, 2);
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(10, 0, 1);
    CHECK_THROWS_AS(weighted_linear_qr(X, y, Eigen::VectorXd::Zero(10), 0.5), DegenerateWeights);
    CHECK_THROWS_AS(weighted_linear_qr(X, y, Eigen::VectorXd::Ones(10), 0.5), SingularDesign);
    CHECK_THROWS_AS(weighted_linear_qr(X.leftCols(1), y, Eigen::VectorXd::Ones(10), 1.0), DomainError);
}

TEST_CASE("qar1 forecasts") {
    const std::vector<double> c(50, 0.7);
    CHECK(qar1_forecast(c, 0.05) == doctest::Approx(0.7));

    const auto z = sample(Dist::normal(), 500, 17);
    CHECK(std::abs(qar1_forecast(z, 0.05) - quantile_type7(z, 0.95)) < 0.1);

    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto w = sample(Dist::standardized_t(5.0), 250, 100 + s);
        CHECK(qar1_forecast(w, 0.01) >= qar1_forecast(w, 0.05));
    }
}

}
