#pragma once

#include "tailrisk/backtest.hpp"
#include "tailrisk/market_data.hpp"
#include "tailrisk/risk_forecast.hpp"
#include "tailrisk/simstudy.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tailrisk {

/// Shortest decimal text that reads back to the same double; NaN prints as "nan".
std::string format_double(double v);

/// Reads a CSV with a `loss` column and an optional `date` column, located by name.
LogLossSeries read_losses_csv(std::istream& in);
void write_losses_csv(std::ostream& out, const LogLossSeries& s);

/// `stat,value` rows.
void write_summary_csv(std::ostream& out, const SummaryStats& s);

/// t,date,loss,model,alpha,var,es,flags,sigma
void write_forecast_csv(std::ostream& out, std::span<const ForecastRecord> records);
std::vector<ForecastRecord> read_forecast_csv(std::istream& in);

/// model,alpha,n,x,prop,uc_lr,uc_p,cc_lr,cc_p,es_boot_p,v1,v2,v,rmse_var,rmse_es
void write_backtest_csv(std::ostream& out, std::span<const BacktestReport> reports);
std::vector<BacktestReport> read_backtest_csv(std::istream& in);

/// t,loss,sigma_true,gamma,z,nu and true_var_<alpha>,true_es_<alpha> per alpha.
void write_simpath_csv(std::ostream& out, const SimPath& path, std::span<const double> alphas);
SimPath read_simpath_csv(std::istream& in);

void write_rejections_csv(std::ostream& out, const StudyReport& r);
/// Long format, one row per (rep, model, alpha).
void write_rmse_csv(std::ostream& out, const StudyReport& r);
void write_regions_csv(std::ostream& out, const StudyReport& r);
void write_diagnostics_csv(std::ostream& out, const StudyReport& r);
/// key,value totals (coherence counters and completion counts).
void write_study_totals_csv(std::ostream& out, const StudyReport& r);

}  // namespace tailrisk
