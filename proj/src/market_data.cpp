#include "tailrisk/market_data.hpp"

#include "tailrisk/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <string_view>

namespace tailrisk {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

bool is_iso_date(std::string_view s) {
    // YYYY-MM-DD, optionally followed by a time part (THH:MM:SS...).
    if (s.size() < 10) return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    if (s[4] != '-' || s[7] != '-') return false;
    const int month = (s[5] - '0') * 10 + (s[6] - '0');
    const int day = (s[8] - '0') * 10 + (s[9] - '0');
    if (month < 1 || month > 12 || day < 1 || day > 31) return false;
    return s.size() == 10 || s[10] == 'T' || s[10] == ' ';
}

bool parse_double(std::string_view s, double& out) {
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

PriceSeries parse_price_csv(std::istream& in) {
    PriceSeries out;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        std::string_view view = line;
        if (row == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
        view = trim(view);
        if (view.empty()) continue;
        const auto fields = split_commas(view);
        if (!header_seen) {
            if (fields.size() != 2 || fields[0] != "date" || fields[1] != "close")
                throw ParseError(row, "expected header 'date,close'");
            header_seen = true;
            continue;
        }
        if (fields.size() != 2) throw ParseError(row, "expected exactly 2 fields");
        if (!is_iso_date(fields[0])) throw ParseError(row, "malformed date '" + std::string(fields[0]) + "'");
        double price = 0.0;
        if (!parse_double(fields[1], price) || !std::isfinite(price))
            throw ParseError(row, "malformed close '" + std::string(fields[1]) + "'");
        if (price <= 0.0) throw ParseError(row, "non-positive close");
        if (!out.dates.empty() && !(out.dates.back() < fields[0]))
            throw OrderError(row, "date not strictly increasing");
        out.dates.emplace_back(fields[0]);
        out.prices.push_back(price);
    }
    if (!header_seen) throw ParseError(1, "empty input");
    return out;
}

void validate(const PriceSeries& p) {
    if (p.dates.size() != p.prices.size()) throw AlignmentError("dates and prices differ in length");
    if (p.size() < 2) throw InsufficientData("price series needs at least 2 rows");
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p.prices[i] > 0.0) || !std::isfinite(p.prices[i]))
            throw ParseError(i + 2, "non-positive close");
        if (i > 0 && !(p.dates[i - 1] < p.dates[i])) throw OrderError(i + 2, "date not strictly increasing");
    }
}

LogLossSeries log_losses(const PriceSeries& p) {
    validate(p);
    LogLossSeries out;
    out.dates.assign(p.dates.begin() + 1, p.dates.end());
    out.losses.resize(p.size() - 1);
    for (std::size_t t = 0; t + 1 < p.size(); ++t)
        out.losses[t] = -std::log(p.prices[t + 1] / p.prices[t]);
    return out;
}

SummaryStats summary_stats(std::span<const double> x) {
    if (x.size() < 2) throw InsufficientData("summary statistics need at least 2 values");
    const double n = static_cast<double>(x.size());
    SummaryStats s;
    double sum = 0.0;
    s.min = x[0];
    s.max = x[0];
    for (double v : x) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - s.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    s.sd = std::sqrt(m2 / (n - 1.0));
    if (m2 == 0.0) {
        s.sd = 0.0;
        s.skewness = std::numeric_limits<double>::quiet_NaN();
        s.excess_kurtosis = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    // Rounding can push the mean a hair outside [min, max] for near-constant data.
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

std::vector<Window> rolling_windows(std::span<const double> losses, std::size_t window) {
    if (window < 10) throw DomainError("window size must be at least 10");
    if (losses.size() <= window) throw InsufficientData("series length must exceed the window size");
    std::vector<Window> out;
    out.reserve(losses.size() - window);
    for (std::size_t k = 0; k + window < losses.size(); ++k)
        out.push_back(Window{k, losses.subspan(k, window), k + window});
    return out;
}

}  // namespace tailrisk
