#include "tailrisk/csv_io.hpp"

#include "tailrisk/errors.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <map>
#include <ostream>

namespace tailrisk {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string clean(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

struct Table {
    std::map<std::string, std::size_t> col;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] bool has(const std::string& name) const { return col.count(name) > 0; }
    [[nodiscard]] std::size_t index(const std::string& name) const {
        const auto it = col.find(name);
        if (it == col.end()) throw ParseError(1, "missing column: " + name);
        return it->second;
    }
};

Table read_table(std::istream& in) {
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split(line);
    for (std::size_t i = 0; i < header.size(); ++i) t.col[header[i]] = i;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (fields.size() != header.size()) throw ParseError(row, "expected " + std::to_string(header.size()) + " fields");
        t.rows.push_back(std::move(fields));
    }
    return t;
}

double to_double(const std::string& s, std::size_t row) {
    if (s == "nan" || s == "NaN" || s == "NA") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw ParseError(row, "not a number: '" + s + "'");
    return v;
}

std::size_t to_size(const std::string& s, std::size_t row) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw ParseError(row, "not an integer: '" + s + "'");
    return v;
}

std::optional<double> opt_double(const std::string& s, std::size_t row) {
    if (s.empty()) return std::nullopt;
    return to_double(s, row);
}

std::string fmt(const std::optional<double>& v) { return v ? format_double(*v) : std::string{}; }

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

LogLossSeries read_losses_csv(std::istream& in) {
    const Table t = read_table(in);
    const std::size_t li = t.index("loss");
    const bool dated = t.has("date");
    LogLossSeries s;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double v = to_double(t.rows[r][li], r + 2);
        if (!std::isfinite(v)) throw ParseError(r + 2, "loss must be finite");
        s.losses.push_back(v);
        s.dates.push_back(dated ? t.rows[r][t.index("date")] : std::string{});
    }
    return s;
}

void write_losses_csv(std::ostream& out, const LogLossSeries& s) {
    out << "date,loss\n";
    for (std::size_t i = 0; i < s.losses.size(); ++i)
        out << (i < s.dates.size() ? s.dates[i] : std::string{}) << ',' << format_double(s.losses[i]) << '\n';
}

void write_summary_csv(std::ostream& out, const SummaryStats& s) {
    out << "stat,value\n";
    out << "mean," << format_double(s.mean) << '\n';
    out << "sd," << format_double(s.sd) << '\n';
    out << "skewness," << format_double(s.skewness) << '\n';
    out << "excess_kurtosis," << format_double(s.excess_kurtosis) << '\n';
    out << "min," << format_double(s.min) << '\n';
    out << "max," << format_double(s.max) << '\n';
}

void write_forecast_csv(std::ostream& out, std::span<const ForecastRecord> records) {
    out << "t,date,loss,model,alpha,var,es,flags,sigma\n";
    for (const auto& r : records)
        out << r.t << ',' << r.date << ',' << format_double(r.loss) << ',' << to_string(r.model) << ','
            << format_double(r.alpha) << ',' << format_double(r.var) << ',' << fmt(r.es) << ','
            << flags_to_string(r.flags) << ',' << format_double(r.sigma) << '\n';
}

std::vector<ForecastRecord> read_forecast_csv(std::istream& in) {
    const Table t = read_table(in);
    const std::size_t ti = t.index("t"), di = t.index("date"), li = t.index("loss"), mi = t.index("model"),
                      ai = t.index("alpha"), vi = t.index("var"), ei = t.index("es"), fi = t.index("flags");
    const bool with_sigma = t.has("sigma");
    std::vector<ForecastRecord> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& f = t.rows[r];
        const std::size_t row = r + 2;
        ForecastRecord rec;
        rec.t = to_size(f[ti], row);
        rec.date = f[di];
        rec.loss = to_double(f[li], row);
        try {
            rec.model = parse_model(f[mi]);
            rec.flags = parse_flags(f[fi]);
        } catch (const Error& e) {
            throw ParseError(row, e.what());
        }
        rec.alpha = to_double(f[ai], row);
        rec.var = to_double(f[vi], row);
        rec.es = opt_double(f[ei], row);
        rec.sigma = with_sigma ? to_double(f[t.index("sigma")], row) : 1.0;
        out.push_back(std::move(rec));
    }
    return out;
}

void write_backtest_csv(std::ostream& out, std::span<const BacktestReport> reports) {
    out << "model,alpha,n,x,prop,uc_lr,uc_p,cc_lr,cc_p,es_boot_p,v1,v2,v,rmse_var,rmse_es\n";
    for (const auto& r : reports)
        out << to_string(r.model) << ',' << format_double(r.alpha) << ',' << r.n << ',' << r.x << ','
            << format_double(r.prop) << ',' << format_double(r.uc_lr) << ',' << format_double(r.uc_p) << ','
            << format_double(r.cc_lr) << ',' << format_double(r.cc_p) << ',' << fmt(r.es_boot_p) << ',' << fmt(r.v1)
            << ',' << fmt(r.v2) << ',' << fmt(r.v) << ',' << fmt(r.rmse_var) << ',' << fmt(r.rmse_es) << '\n';
}

std::vector<BacktestReport> read_backtest_csv(std::istream& in) {
    const Table t = read_table(in);
    std::vector<BacktestReport> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& f = t.rows[r];
        const std::size_t row = r + 2;
        const auto get = [&](const char* name) -> const std::string& { return f[t.index(name)]; };
        BacktestReport b;
        try {
            b.model = parse_model(get("model"));
        } catch (const Error& e) {
            throw ParseError(row, e.what());
        }
        b.alpha = to_double(get("alpha"), row);
        b.n = to_size(get("n"), row);
        b.x = to_size(get("x"), row);
        b.prop = to_double(get("prop"), row);
        b.uc_lr = to_double(get("uc_lr"), row);
        b.uc_p = to_double(get("uc_p"), row);
        b.cc_lr = to_double(get("cc_lr"), row);
        b.cc_p = to_double(get("cc_p"), row);
        b.es_boot_p = opt_double(get("es_boot_p"), row);
        b.v1 = opt_double(get("v1"), row);
        b.v2 = opt_double(get("v2"), row);
        b.v = opt_double(get("v"), row);
        b.rmse_var = opt_double(get("rmse_var"), row);
        b.rmse_es = opt_double(get("rmse_es"), row);
        out.push_back(b);
    }
    return out;
}

void write_simpath_csv(std::ostream& out, const SimPath& path, std::span<const double> alphas) {
    std::vector<std::pair<std::vector<double>, std::vector<double>>> truth;
    out << "t,loss,sigma_true,gamma,z,nu";
    for (double a : alphas) {
        out << ",true_var_" << format_double(a) << ",true_es_" << format_double(a);
        truth.push_back(true_var_es(path, a));
    }
    out << '\n';
    for (std::size_t t = 0; t < path.losses.size(); ++t) {
        out << t << ',' << format_double(path.losses[t]) << ',' << format_double(path.sigma_true[t]) << ','
            << format_double(path.gamma[t]) << ',' << format_double(path.z[t]) << ',' << format_double(path.nu);
        for (const auto& [v, e] : truth) out << ',' << format_double(v[t]) << ',' << format_double(e[t]);
        out << '\n';
    }
}

SimPath read_simpath_csv(std::istream& in) {
    const Table t = read_table(in);
    SimPath p;
    const std::size_t li = t.index("loss"), si = t.index("sigma_true"), gi = t.index("gamma"), zi = t.index("z"),
                      ni = t.index("nu");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& f = t.rows[r];
        if (to_size(f[t.index("t")], r + 2) != r) throw OrderError(r + 2, "simulated path rows must be t = 0, 1, ...");
        p.losses.push_back(to_double(f[li], r + 2));
        p.sigma_true.push_back(to_double(f[si], r + 2));
        p.gamma.push_back(to_double(f[gi], r + 2));
        p.z.push_back(to_double(f[zi], r + 2));
        p.nu = to_double(f[ni], r + 2);
    }
    if (p.losses.empty()) throw ParseError(2, "simulated path is empty");
    return p;
}

void write_rejections_csv(std::ostream& out, const StudyReport& r) {
    out << "scenario,model,alpha,completed,n_reps,uc_reject_pct,cc_reject_pct,es_boot_reject_pct,mean_rmse_var,"
           "mean_rmse_es,nonconverged_windows\n";
    for (const auto& row : r.rejections)
        out << to_string(r.config.scenario) << ',' << to_string(row.model) << ',' << format_double(row.alpha) << ','
            << row.completed << ',' << r.config.n_reps << ',' << format_double(row.uc_pct) << ','
            << format_double(row.cc_pct) << ',' << format_double(row.es_pct) << ','
            << format_double(row.mean_rmse_var) << ',' << format_double(row.mean_rmse_es) << ',' << row.nonconverged
            << '\n';
}

void write_rmse_csv(std::ostream& out, const StudyReport& r) {
    out << "scenario,rep,model,alpha,completed,rmse_var,rmse_es,n,x,uc_p,cc_p,es_boot_p,v,carried_forward,"
           "weight_fallback,window_errors,es_below_var,reason\n";
    for (const auto& x : r.reps)
        out << to_string(r.config.scenario) << ',' << x.rep << ',' << to_string(x.model) << ','
            << format_double(x.alpha) << ',' << (x.completed ? 1 : 0) << ',' << fmt(x.backtest.rmse_var) << ','
            << fmt(x.backtest.rmse_es) << ',' << x.backtest.n << ',' << x.backtest.x << ','
            << (x.completed ? format_double(x.backtest.uc_p) : std::string{}) << ','
            << (x.completed ? format_double(x.backtest.cc_p) : std::string{}) << ',' << fmt(x.backtest.es_boot_p)
            << ',' << fmt(x.backtest.v) << ',' << x.carried_forward << ',' << x.weight_fallback << ','
            << x.window_errors << ',' << x.es_below_var << ',' << clean(x.reason) << '\n';
}

void write_regions_csv(std::ostream& out, const StudyReport& r) {
    out << "scenario,model,alpha,measure,region,count,truth_low,truth_high,bias,variance\n";
    for (const auto& x : r.regions)
        out << to_string(r.config.scenario) << ',' << to_string(x.model) << ',' << format_double(x.alpha) << ','
            << x.measure << ',' << x.region << ',' << x.count << ',' << format_double(x.truth_low) << ','
            << format_double(x.truth_high) << ',' << format_double(x.bias) << ',' << format_double(x.variance)
            << '\n';
}

void write_diagnostics_csv(std::ostream& out, const StudyReport& r) {
    out << "alpha,n,hall_sheather,bofinger\n";
    for (const auto& d : r.diagnostics)
        out << format_double(d.alpha) << ',' << r.config.window - 1 << ',' << format_double(d.hall_sheather) << ','
            << format_double(d.bofinger) << '\n';
}

void write_study_totals_csv(std::ostream& out, const StudyReport& r) {
    std::size_t completed = 0;
    for (const auto& x : r.reps) completed += x.completed;
    out << "key,value\n";
    out << "scenario," << to_string(r.config.scenario) << '\n';
    out << "n_reps," << r.config.n_reps << '\n';
    out << "streams," << r.reps.size() << '\n';
    out << "streams_completed," << completed << '\n';
    out << "es_below_var," << r.es_below_var << '\n';
    out << "var_monotonicity_violations," << r.var_monotonicity_violations << '\n';
}

}  // namespace tailrisk
