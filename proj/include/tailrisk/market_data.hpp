#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tailrisk {

/// Daily closing prices. Dates are opaque labels that must be strictly
/// increasing in lexical (ISO-8601) order.
struct PriceSeries {
    std::vector<std::string> dates;
    std::vector<double> prices;

    [[nodiscard]] std::size_t size() const noexcept { return prices.size(); }
};

/// Negated log returns, L_t = -ln(Y_t / Y_{t-1}). Each loss carries the date
/// of the later price.
struct LogLossSeries {
    std::vector<std::string> dates;
    std::vector<double> losses;

    [[nodiscard]] std::size_t size() const noexcept { return losses.size(); }
};

/// A contiguous slice [start, start + W) used to forecast index start + W.
struct Window {
    std::size_t start = 0;
    std::span<const double> values;
    std::size_t target = 0;
};

struct SummaryStats {
    double mean = 0.0;
    double sd = 0.0;
    double skewness = 0.0;         ///< NaN when sd == 0
    double excess_kurtosis = 0.0;  ///< NaN when sd == 0
    double min = 0.0;
    double max = 0.0;
};

/// Parses a `date,close` CSV. Throws ParseError or OrderError with the
/// offending 1-based row number (header is row 1).
PriceSeries parse_price_csv(std::istream& in);

/// Validates the PriceSeries invariants (length >= 2, prices > 0, dates
/// strictly increasing).
void validate(const PriceSeries& p);

LogLossSeries log_losses(const PriceSeries& p);

/// Sample mean, sd (n - 1 denominator), standardized third moment and
/// excess kurtosis from central moments with 1/n normalization.
SummaryStats summary_stats(std::span<const double> losses);

std::vector<Window> rolling_windows(std::span<const double> losses, std::size_t window);

}  // namespace tailrisk
