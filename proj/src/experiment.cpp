#include "prhc/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

namespace prhc::harness {

namespace {
constexpr double nan = std::numeric_limits<double>::quiet_NaN();
constexpr double inf = std::numeric_limits<double>::infinity();
}  // namespace

std::vector<PolicySpec> default_policies(Index N)
{
  return {{"overlap", half_overlap(N)}, {"standard", N - 1}};
}

ScenarioParams scenario_params(const Scenario& sc, Index N, const ExperimentOptions& opts)
{
  ScenarioParams sp;
  try {
    SampleGrid<double> grid;
    grid.n = sc.sys.n();
    grid.m = sc.sys.m();
    grid.per_axis = opts.alpha_grid_per_axis;
    const auto lo = estimate_alpha_lower(*sc.costs, grid);

    CertificateSampling<double> sampling;
    sampling.sample_budget = opts.sample_budget;
    sampling.w_cap = sc.w_full.cap;
    sampling.T = sc.T();
    sampling.seed = sc.seed;
    sampling.solver = opts.solver;
    const auto hi = estimate_gamma_alpha_upper(sc.sys, sc.costs, N, sampling);

    sp.alpha_lo = lo.value;
    sp.alpha_hi = hi.alpha_hi;
    sp.gamma_bar_sq = hi.gamma_bar_sq;
    sp.beta = lo.value / hi.alpha_hi;
    sp.certified = lo.certified && hi.certified;
    sp.params = AssumptionParams<double>::make(lo.value, hi.alpha_hi, hi.gamma_bar_sq, sp.certified);
  } catch (const std::invalid_argument& e) {
    sp.failure = e.what();
  } catch (const std::domain_error& e) {
    sp.failure = e.what();
  }
  return sp;
}

ReportRow run_row(const Scenario& sc, const PolicySpec& policy, const ScenarioParams& sp,
                  const ExperimentOptions& opts)
{
  const Index N = sc.N(), T = sc.T();
  const auto sched = build_schedule(N, policy.M, T);
  const auto run = run_policy(sc.sys, sc.costs, sc.w_full, sc.x1, sched, opts.solver, opts.policy);

  ReportRow row;
  row.seed = sc.seed;
  row.cost_kind = std::string(to_string(sc.config.cost));
  row.policy = policy.name;
  row.n = sc.sys.n();
  row.m = sc.sys.m();
  row.T = T;
  row.N = N;
  row.M = policy.M;
  row.J = run.J;
  row.energy = sc.w_full.energy(0, T);
  row.gain = row.energy > 0 ? row.J / row.energy : nan;
  row.beta = sp.beta;
  row.gamma_bar_sq = sp.gamma_bar_sq;
  row.certified = sp.certified;
  row.omega_op = inf;
  row.bound = inf;
  row.truncated_tail = run.truncated_tail;
  if (sp.params) {
    const auto cert = certify(run, *sp.params, sched, sc.costs->sigma(sc.x1));
    row.omega_op = cert.omega_op;
    row.bound = cert.bound;
    row.satisfied = cert.satisfied;
  }
  return row;
}

std::vector<ReportRow> run_comparison(const Scenario& sc, const ExperimentOptions& opts,
                                      const std::vector<PolicySpec>& policies)
{
  try {
    const auto sp = scenario_params(sc, sc.N(), opts);
    std::vector<ReportRow> rows;
    for (const auto& p : policies) rows.push_back(run_row(sc, p, sp, opts));
    return rows;
  } catch (const std::exception& e) {
    throw std::runtime_error("seed " + std::to_string(sc.seed) + ": " + e.what());
  }
}

std::vector<ReportRow> run_comparison(const Scenario& sc, const ExperimentOptions& opts)
{
  return run_comparison(sc, opts, default_policies(sc.N()));
}

void sort_rows(std::vector<ReportRow>& rows)
{
  std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.seed, a.cost_kind, a.policy, a.N, a.M) < std::tie(b.seed, b.cost_kind, b.policy, b.N, b.M);
  });
}

int worker_count(int requested)
{
  if (requested > 0) return requested;
  if (const char* env = std::getenv("PRHC_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ExperimentReport run_table1(const Table1Options& opts)
{
  struct Job
  {
    std::uint64_t seed;
    Index N;
    CostKind cost;
  };
  std::vector<Job> jobs;
  for (auto seed : opts.seeds)
    for (auto N : opts.N_list)
      for (auto cost : opts.costs) jobs.push_back({seed, N, cost});

  std::vector<std::vector<ReportRow>> results(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t k; (k = next++) < jobs.size();) {
      try {
        auto cfg = opts.base;
        cfg.N = jobs[k].N;
        cfg.cost = jobs[k].cost;
        results[k] = run_comparison(gen_scenario(jobs[k].seed, cfg), opts.experiment);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(worker_count(opts.threads), static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  ExperimentReport report;
  for (auto& r : results) report.rows.insert(report.rows.end(), r.begin(), r.end());
  sort_rows(report.rows);
  report.aggregates = aggregate(report.rows);
  return report;
}

std::vector<AggregateCell> aggregate(const std::vector<ReportRow>& rows)
{
  std::map<std::tuple<std::string, std::string, Index>, std::vector<const ReportRow*>> cells;
  for (const auto& r : rows) cells[{r.cost_kind, r.policy, r.N}].push_back(&r);

  std::vector<AggregateCell> out;
  for (const auto& [key, members] : cells) {
    AggregateCell c;
    std::tie(c.cost_kind, c.policy, c.N) = key;
    c.iterations = static_cast<Index>(members.size());
    double gain_sum = 0, tb = 0, tob = 0;
    Index gains = 0, params = 0;
    for (const auto* r : members) {
      c.mean_J += r->J;
      c.mean_energy += r->energy;
      if (std::isfinite(r->gain)) {
        gain_sum += r->gain;
        ++gains;
      }
      if (std::isfinite(r->beta) && std::isfinite(r->gamma_bar_sq)) {
        tb += 2 * r->beta * r->gamma_bar_sq;
        tob += 2 / r->beta * r->gamma_bar_sq;
        ++params;
      }
      if (r->certified && std::isfinite(r->bound)) {
        ++c.bound_checks;
        if (!r->satisfied) ++c.bound_violations;
      }
    }
    c.mean_J /= double(c.iterations);
    c.mean_energy /= double(c.iterations);
    c.dg = c.mean_energy > 0 ? c.mean_J / c.mean_energy : nan;
    c.mean_gain = gains > 0 ? gain_sum / double(gains) : nan;
    c.two_beta_gamma_bar_sq = params > 0 ? tb / double(params) : nan;
    c.two_over_beta_gamma_bar_sq = params > 0 ? tob / double(params) : nan;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace prhc::harness
