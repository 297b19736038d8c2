#pragma once

#include "prhc/harness/experiment.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace prhc::harness {

enum class ReportFormat
{
  csv,
  json
};

ReportFormat parse_format(std::string_view name);

/// Column order of the row CSV.
inline constexpr std::string_view kRowHeader =
    "seed,cost_kind,policy,n,m,T,N,M,J,energy,gain,beta,gamma_bar_sq,certified,omega_op,bound,satisfied,truncated_tail";

inline constexpr std::string_view kAggregateHeader =
    "cost_kind,policy,N,iterations,mean_J,mean_energy,dg,mean_gain,two_beta_gamma_bar_sq,"
    "two_over_beta_gamma_bar_sq,bound_checks,bound_violations";

/// Shortest decimal that round-trips; "nan", "inf", "-inf" for non-finite values.
std::string format_number(double v);
double parse_number(std::string_view s);

std::string rows_to_csv(const std::vector<ReportRow>& rows);
std::string aggregates_to_csv(const std::vector<AggregateCell>& cells);

/// {"config": {...}, "rows": [...], "aggregates": [...]}; non-finite numbers are encoded as strings.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(std::string_view text);

/// Writes the rows (csv) or the whole report (json) to `path`; "-" or empty means stdout.
void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path);
void write_text(const std::string& text, const std::string& path);
std::string read_text(const std::string& path);

/// Field-wise equality where NaN equals NaN.
bool identical(const ReportRow& a, const ReportRow& b);
bool identical(const ExperimentReport& a, const ExperimentReport& b);

/// key=value lines; '#' starts a comment; blank lines ignored; later keys win.
ConfigEcho parse_config_text(std::string_view text);

}  // namespace prhc::harness
