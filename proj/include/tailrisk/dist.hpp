#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace tailrisk {

enum class DistKind { StandardNormal, StandardizedT };

/// Unit-variance innovation law. The Student-t is always the
/// variance-standardized version: classical t(nu) scaled by sqrt((nu-2)/nu).
struct Dist {
    DistKind kind = DistKind::StandardNormal;
    double nu = 0.0;  ///< degrees of freedom, used only for StandardizedT

    static Dist normal() { return {DistKind::StandardNormal, 0.0}; }
    static Dist standardized_t(double nu);  ///< throws DomainError unless nu > 2

    /// Scale applied to the classical t (1 for the normal).
    [[nodiscard]] double t_scale() const;
};

double pdf(const Dist& d, double x);
double cdf(const Dist& d, double x);
/// Upper tail 1 - cdf, computed without cancellation.
double survival(const Dist& d, double x);
/// Inverse cdf by safeguarded Newton iteration on cdf; throws DomainError
/// unless 0 < p < 1.
double quantile(const Dist& d, double p);
/// E|z|.
double abs_moment(const Dist& d);

double gaussian_kernel(double u);

// Classical (unscaled) Student-t helpers.
double student_t_pdf(double x, double nu);
double student_t_cdf(double x, double nu);

/// Upper tail probability of a chi-squared variable with `df` degrees of
/// freedom (regularized upper incomplete gamma).
double chi_squared_sf(double x, double df);

/// xoshiro256** seeded through splitmix64 from a (seed, stream) pair, so
/// independent replications can be generated in any order.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    /// Gamma(shape, 1) by Marsaglia-Tsang.
    double gamma(double shape);
    double draw(const Dist& d);
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

private:
    std::array<std::uint64_t, 4> s_{};
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::vector<double> sample(const Dist& d, std::size_t n, std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace tailrisk
