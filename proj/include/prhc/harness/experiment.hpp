#pragma once

#include "prhc/assumptions.hpp"
#include "prhc/bounds.hpp"
#include "prhc/harness/scenario.hpp"

#include <string>
#include <utility>
#include <vector>

namespace prhc::harness {

struct ExperimentOptions
{
  SolverConfig<double> solver{};
  PolicyOptions policy{};
  std::size_t sample_budget = 128;  // sampled certificate, non-quadratic costs
  Index alpha_grid_per_axis = 41;
};

/// One (scenario, policy) line of a report. NaN marks an undefined gain or beta.
struct ReportRow
{
  std::uint64_t seed = 0;
  std::string cost_kind;
  std::string policy;
  Index n = 0, m = 0, T = 0, N = 0, M = 0;
  double J = 0, energy = 0, gain = 0;
  double beta = 0, gamma_bar_sq = 0;
  bool certified = false;
  double omega_op = 0, bound = 0;
  bool satisfied = false;
  bool truncated_tail = false;
};

/// Table layout cell: one (cost kind, policy, N).
struct AggregateCell
{
  std::string cost_kind;
  std::string policy;
  Index N = 0;
  Index iterations = 0;
  double mean_J = 0;
  double mean_energy = 0;
  double dg = 0;         // mean J / mean energy
  double mean_gain = 0;  // mean of per-iteration gains (finite ones)
  double two_beta_gamma_bar_sq = 0;
  double two_over_beta_gamma_bar_sq = 0;
  Index bound_checks = 0;  // rows with certified params and a finite bound
  Index bound_violations = 0;
};

using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

struct ExperimentReport
{
  ConfigEcho config;
  std::vector<ReportRow> rows;
  std::vector<AggregateCell> aggregates;
};

struct PolicySpec
{
  std::string name;
  Index M = 0;
};

/// {overlap, M = floor(N/2)} and {standard, M = N - 1}.
std::vector<PolicySpec> default_policies(Index N);

/// Assumption constants for one scenario and preview; nullopt fields when undefined.
struct ScenarioParams
{
  double alpha_lo = std::numeric_limits<double>::quiet_NaN();
  double alpha_hi = std::numeric_limits<double>::quiet_NaN();
  double gamma_bar_sq = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  bool certified = false;
  std::optional<AssumptionParams<double>> params;
  std::string failure;  // why params is empty
};

/// Exact constants for quadratic costs, grid/sampled estimates otherwise.
ScenarioParams scenario_params(const Scenario& sc, Index N, const ExperimentOptions& opts);

/// Run one policy and certify it against `sp`.
ReportRow run_row(const Scenario& sc, const PolicySpec& policy, const ScenarioParams& sp,
                  const ExperimentOptions& opts);

/**
 * Runs each policy on the scenario and returns one row per policy. Errors
 * are rethrown as std::runtime_error prefixed with the scenario seed.
 */
std::vector<ReportRow> run_comparison(const Scenario& sc, const ExperimentOptions& opts,
                                      const std::vector<PolicySpec>& policies);
std::vector<ReportRow> run_comparison(const Scenario& sc, const ExperimentOptions& opts = {});

struct Table1Options
{
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<Index> N_list{6, 9};
  std::vector<CostKind> costs{CostKind::quadratic, CostKind::nonconvex, CostKind::set_distance};
  ScenarioConfig base{};
  ExperimentOptions experiment{};
  int threads = 0;  // 0: PRHC_THREADS, then hardware concurrency
};

/// Every (seed, N, cost) job, run in parallel, rows sorted by (seed, cost_kind, policy, N).
ExperimentReport run_table1(const Table1Options& opts);

/// Cells sorted by (cost_kind, policy, N).
std::vector<AggregateCell> aggregate(const std::vector<ReportRow>& rows);

/// Stable order used by every report.
void sort_rows(std::vector<ReportRow>& rows);

/// PRHC_THREADS if set and positive, else hardware concurrency (at least 1).
int worker_count(int requested = 0);

}  // namespace prhc::harness
