#include "tailrisk/dist.hpp"

#include "tailrisk/errors.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace tailrisk {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// Acklam's rational approximation, used only as a starting point for Newton.
double normal_quantile_guess(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double log_t_norm(double nu) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi);
}

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Dist Dist::standardized_t(double nu) {
    if (!(nu > 2.0) || !std::isfinite(nu)) throw DomainError("standardized t requires nu > 2");
    return {DistKind::StandardizedT, nu};
}

double Dist::t_scale() const {
    return kind == DistKind::StandardNormal ? 1.0 : std::sqrt((nu - 2.0) / nu);
}

double student_t_pdf(double x, double nu) {
    return std::exp(log_t_norm(nu) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double student_t_cdf(double x, double nu) {
    // P(|T| > |x|) = I_{nu/(nu+x^2)}(nu/2, 1/2)
    const double x2 = x * x;
    const double tail = 0.5 * boost::math::ibeta(0.5 * nu, 0.5, nu / (nu + x2));
    return x < 0.0 ? tail : 1.0 - tail;
}

namespace {
double student_t_sf(double x, double nu) { return student_t_cdf(-x, nu); }
}  // namespace

double pdf(const Dist& d, double x) {
    if (d.kind == DistKind::StandardNormal) return kInvSqrt2Pi * std::exp(-0.5 * x * x);
    const double s = d.t_scale();
    return student_t_pdf(x / s, d.nu) / s;
}

double cdf(const Dist& d, double x) {
    if (d.kind == DistKind::StandardNormal) return normal_cdf(x);
    return student_t_cdf(x / d.t_scale(), d.nu);
}

double survival(const Dist& d, double x) {
    if (d.kind == DistKind::StandardNormal) return normal_sf(x);
    return student_t_sf(x / d.t_scale(), d.nu);
}

double quantile(const Dist& d, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    if (p == 0.5) return 0.0;
    // Work in the lower half and reflect; survival gives full relative
    // precision in the far tail.
    const bool upper = p > 0.5;
    const double target = upper ? 1.0 - p : p;

    double x = normal_quantile_guess(target);
    if (d.kind == DistKind::StandardizedT) {
        // Heavier tails: widen the starting point a bit so Newton starts outside.
        x *= 1.0 + 1.0 / d.nu;
    }
    double lo = -1e6, hi = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        const double f = cdf(d, x) - target;
        if (f > 0.0) hi = std::min(hi, x);
        else lo = std::max(lo, x);
        const double dens = pdf(d, x);
        double next = dens > 0.0 ? x - f / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - x);
        x = next;
        if (step <= 1e-12 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-14 * std::max(1.0, std::abs(x))) break;
    }
    return upper ? -x : x;
}

double abs_moment(const Dist& d) {
    if (d.kind == DistKind::StandardNormal) return std::sqrt(2.0 / std::numbers::pi);
    const double nu = d.nu;
    return 2.0 * std::sqrt(nu - 2.0) * std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
           ((nu - 1.0) * std::sqrt(std::numbers::pi));
}

double gaussian_kernel(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

double chi_squared_sf(double x, double df) {
    if (!(df > 0.0)) throw DomainError("chi-squared df must be positive");
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed;
    std::uint64_t mix = splitmix64(x) ^ (stream * 0xD1B54A32D192ED03ULL);
    for (auto& word : s_) word = splitmix64(mix);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    // 53 random bits, shifted by half an ulp so 0 and 1 are never returned.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_normal_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double Rng::gamma(double shape) {
    if (shape < 1.0) {
        const double u = uniform();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double Rng::draw(const Dist& d) {
    const double z = normal();
    if (d.kind == DistKind::StandardNormal) return z;
    const double chi2 = 2.0 * gamma(0.5 * d.nu);
    return z / std::sqrt(chi2 / d.nu) * d.t_scale();
}

std::size_t Rng::index(std::size_t n) {
    // Lemire's multiply-shift; the bias is below 2^-64 * n and irrelevant here.
    return static_cast<std::size_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

std::vector<double> sample(const Dist& d, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    Rng rng(seed, stream);
    std::vector<double> out(n);
    for (auto& v : out) v = rng.draw(d);
    return out;
}

}  // namespace tailrisk
