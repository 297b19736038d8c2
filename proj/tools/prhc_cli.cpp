// Command-line front end: run, table1, certify, oracle, audit.

#include "prhc/harness/experiment.hpp"
#include "prhc/harness/oracle.hpp"
#include "prhc/harness/report_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <sstream>

using namespace prhc;
using namespace prhc::harness;

namespace {

struct ScenarioFlags
{
  std::uint64_t seed = 0;
  std::string cost = "quad";
  std::string family = "protocol";
  Index n = 2, m = 1, T = 15, N = 6;
  bool onset = true;
  std::size_t sample_budget = 128;

  void attach(CLI::App* app, bool with_seed = true)
  {
    if (with_seed) app->add_option("--seed", seed, "Scenario seed")->capture_default_str();
    app->add_option("--cost", cost, "Cost kind")->check(CLI::IsMember({"quad", "nonconvex", "setdist"}))
        ->capture_default_str();
    app->add_option("--family", family, "Scenario family")->check(CLI::IsMember({"protocol", "stress"}))
        ->capture_default_str();
    app->add_option("--n", n, "State dimension")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--m", m, "Input dimension")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--T", T, "Episode length")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--N", N, "Preview length")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--onset", onset, "Stress family: quiet prefix before the disturbance")->capture_default_str();
    app->add_option("--sample-budget", sample_budget, "Samples for non-quadratic certificates")
        ->check(CLI::PositiveNumber)->capture_default_str();
  }

  ScenarioConfig config() const
  {
    ScenarioConfig c;
    c.cost = parse_cost_kind(cost);
    c.family = parse_family(family);
    c.n = n;
    c.m = m;
    c.T = T;
    c.N = N;
    c.onset = onset;
    return c;
  }

  ExperimentOptions experiment() const
  {
    ExperimentOptions e;
    e.sample_budget = sample_budget;
    return e;
  }

  ConfigEcho echo() const
  {
    return {{"family", family}, {"cost", cost},       {"n", std::to_string(n)},
            {"m", std::to_string(m)}, {"T", std::to_string(T)}, {"N", std::to_string(N)},
            {"onset", onset ? "true" : "false"}, {"sample-budget", std::to_string(sample_budget)}};
  }

  /// Rebuild from a stored report: config echo first, then the row's own fields.
  static ScenarioFlags from(const ConfigEcho& echo, const ReportRow& row)
  {
    ScenarioFlags f;
    for (const auto& [k, v] : echo) {
      if (k == "family") f.family = v;
      if (k == "onset") f.onset = v == "true";
      if (k == "sample-budget") f.sample_budget = std::stoull(v);
    }
    f.seed = row.seed;
    f.cost = row.cost_kind;
    f.n = row.n;
    f.m = row.m;
    f.T = row.T;
    f.N = row.N;
    return f;
  }
};

/// The stress family draws its own n, T and N from the seed.
Scenario make_scenario(const ScenarioFlags& f) { return gen_scenario(f.seed, f.config()); }

std::vector<Index> parse_index_list(const std::string& s)
{
  std::vector<Index> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    const long long v = std::stoll(tok, &used);
    if (used != tok.size() || v < 1) throw std::invalid_argument("bad list entry '" + tok + "'");
    out.push_back(static_cast<Index>(v));
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<std::string> split(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) out.push_back(tok);
  return out;
}

/**
 * Inserts --key=value for every config-file key whose flag is absent from
 * the command line, so explicit flags win.
 */
std::vector<std::string> merge_config(const std::vector<std::string>& args)
{
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty() || args.size() < 2) return args;

  const auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> out(args.begin(), args.begin() + 2);
  for (const auto& [k, v] : parse_config_text(read_text(path))) {
    if (k != "config" && !given(k)) out.push_back("--" + k + "=" + v);
  }
  out.insert(out.end(), args.begin() + 2, args.end());
  return out;
}

Index resolve_M(Index N, Index M, const std::string& rule)
{
  if (M > 0) return M;
  return rule == "standard" ? N - 1 : half_overlap(N);
}

std::string policy_name(Index N, Index M) { return M == N - 1 ? "standard" : M == half_overlap(N) ? "overlap" : "custom"; }

int cmd_run(const ScenarioFlags& f, Index M_flag, const std::string& rule, const std::string& out,
            const std::string& format)
{
  const auto sc = make_scenario(f);
  ExperimentReport report;
  report.config = f.echo();
  report.config.emplace_back("seed", std::to_string(f.seed));
  std::vector<PolicySpec> policies;
  if (M_flag <= 0 && rule == "both") {
    policies = default_policies(sc.N());
    report.config.emplace_back("m-rule", "both");
  } else {
    const Index M = resolve_M(sc.N(), M_flag, rule);
    policies.push_back({policy_name(sc.N(), M), M});
    report.config.emplace_back("M", std::to_string(M));
  }
  report.rows = run_comparison(sc, f.experiment(), policies);
  sort_rows(report.rows);
  report.aggregates = aggregate(report.rows);
  emit_report(report, parse_format(format), out);
  return 0;
}

int cmd_table1(const ScenarioFlags& f, int iters, const std::string& N_list, const std::string& costs,
               const std::string& out, const std::string& format, const std::string& agg_out, int threads)
{
  Table1Options t;
  t.seeds.clear();
  for (int i = 0; i < iters; ++i) t.seeds.push_back(f.seed + static_cast<std::uint64_t>(i));
  t.N_list = parse_index_list(N_list);
  t.costs.clear();
  for (const auto& c : split(costs)) t.costs.push_back(parse_cost_kind(c));
  t.base = f.config();
  t.base.N = *std::max_element(t.N_list.begin(), t.N_list.end());
  t.base.validate();
  t.experiment = f.experiment();
  t.threads = threads;

  auto report = run_table1(t);
  report.config = f.echo();
  report.config.erase(std::remove_if(report.config.begin(), report.config.end(),
                                     [](const auto& kv) { return kv.first == "N" || kv.first == "cost"; }),
                      report.config.end());
  report.config.emplace_back("seed", std::to_string(f.seed));
  report.config.emplace_back("iters", std::to_string(iters));
  report.config.emplace_back("N-list", N_list);
  report.config.emplace_back("costs", costs);
  if (!out.empty()) emit_report(report, parse_format(format), out);
  write_text(aggregates_to_csv(report.aggregates), agg_out);
  return 0;
}

/// Bound from the stored numbers alone (x_1 = 0 in every harness scenario).
double stored_bound(const ReportRow& r)
{
  const double inf = std::numeric_limits<double>::infinity();
  if (!(r.beta > 0 && r.beta <= 1) || !std::isfinite(r.gamma_bar_sq)) return inf;
  if (r.N < 2 * r.M || !(r.beta * r.beta * double(r.M) > 1) || r.T <= r.N) return inf;
  return omega_op(r.beta, r.M) * r.gamma_bar_sq * r.energy;
}

int cmd_certify(const std::string& in, bool rerun, const std::string& out)
{
  const auto report = report_from_json(read_text(in));
  std::ostringstream os;
  os << "seed,cost_kind,policy,N,M,J,bound,satisfied,stored_bound_match" << (rerun ? ",rerun_J,rerun_match" : "")
     << '\n';
  bool ok = true;
  for (const auto& r : report.rows) {
    const double bound = stored_bound(r);
    const bool satisfied = std::isfinite(bound) && r.J <= bound * (1 + 1e-9);
    const bool bound_match = (std::isinf(bound) && std::isinf(r.bound)) ||
                             std::abs(bound - r.bound) <= 1e-9 * std::max(1.0, std::abs(bound));
    if (r.certified && std::isfinite(bound) && !satisfied) ok = false;
    if (!bound_match) ok = false;
    os << r.seed << ',' << r.cost_kind << ',' << r.policy << ',' << r.N << ',' << r.M << ',' << format_number(r.J)
       << ',' << format_number(bound) << ',' << (satisfied ? "true" : "false") << ','
       << (bound_match ? "true" : "false");
    if (rerun) {
      const auto f = ScenarioFlags::from(report.config, r);
      const auto sc = make_scenario(f);
      const auto row = run_comparison(sc, f.experiment(), {{r.policy, r.M}}).front();
      const bool match = std::abs(row.J - r.J) <= 1e-9 * std::max(1.0, std::abs(r.J));
      if (!match) ok = false;
      os << ',' << format_number(row.J) << ',' << (match ? "true" : "false");
    }
    os << '\n';
  }
  write_text(os.str(), out);
  return ok ? 0 : 1;
}

int cmd_oracle(const ScenarioFlags& f, const OracleOptions& o, const std::string& out)
{
  const auto sc = make_scenario(f);
  const auto grid = brute_force_oracle(sc, o);
  SolverConfig<double> cfg;
  double J_full = std::numeric_limits<double>::quiet_NaN();
  if (sc.T() >= 2) J_full = run_standard_rhc(sc.sys, sc.costs, sc.w_full, sc.x1, sc.T(), sc.T(), cfg).J;
  std::ostringstream os;
  os << "seed,cost_kind,T,N,M,J_grid,J_full_preview,J_policy,spacing,evaluations,exhaustive\n";
  double J_policy = std::numeric_limits<double>::quiet_NaN();
  if (sc.N() > 1 && sc.N() <= sc.T()) {
    const auto sched = build_schedule(sc.N(), half_overlap(sc.N()), sc.T());
    J_policy = run_policy(sc.sys, sc.costs, sc.w_full, sc.x1, sched, cfg).J;
  }
  os << sc.seed << ',' << to_string(sc.config.cost) << ',' << sc.T() << ',' << sc.N() << ',' << half_overlap(sc.N())
     << ',' << format_number(grid.J) << ',' << format_number(J_full) << ',' << format_number(J_policy) << ','
     << format_number(grid.spacing) << ',' << format_number(grid.evaluations) << ','
     << (grid.exhaustive ? "true" : "false") << '\n';
  write_text(os.str(), out);
  return 0;
}

int cmd_audit(const std::string& in, double gamma_scale, double tol, const std::string& out)
{
  const auto report = report_from_json(read_text(in));
  std::ostringstream os;
  os << "seed,cost_kind,policy,N,M,a,pairs,min_slack,flagged,note\n";
  bool flagged_any = false;
  for (const auto& r : report.rows) {
    const auto f = ScenarioFlags::from(report.config, r);
    const auto sc = make_scenario(f);
    const auto exp = f.experiment();
    const auto sp = scenario_params(sc, sc.N(), exp);
    os << r.seed << ',' << r.cost_kind << ',' << r.policy << ',' << r.N << ',' << r.M << ',';
    if (!sp.params) {
      os << "nan,0,nan,false,params unavailable\n";
      continue;
    }
    if (!(sp.params->beta * sp.params->beta * double(r.M) > 1)) {
      os << "nan,0,nan,false,M <= 1/beta^2\n";
      continue;
    }
    auto params = *sp.params;
    params.gamma_bar_sq *= gamma_scale;
    const auto sched = build_schedule(sc.N(), r.M, sc.T());
    const auto run = run_policy(sc.sys, sc.costs, sc.w_full, sc.x1, sched, exp.solver, exp.policy);
    const auto audit = recursion_audit(run, params, sc.sys, sc.costs, sc.w_full, exp.solver, tol);
    flagged_any = flagged_any || audit.flagged;
    os << format_number(audit.a) << ',' << audit.slacks.size() << ',' << format_number(audit.min_slack) << ','
       << (audit.flagged ? "true" : "false") << ',' << (params.certified ? "certified" : "sampled") << '\n';
  }
  write_text(os.str(), out);
  return flagged_any ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Overlap receding-horizon control experiments"};
  app.require_subcommand(1);
  std::string config_path;

  ScenarioFlags run_f;
  Index run_M = 0;
  std::string m_rule = "half", run_out = "-", run_format = "csv";
  auto* run = app.add_subcommand("run", "Run one scenario and emit report rows");
  run_f.attach(run);
  run->add_option("--M", run_M, "Overlap (overrides --m-rule)")->check(CLI::PositiveNumber);
  run->add_option("--m-rule", m_rule, "Overlap rule")->check(CLI::IsMember({"half", "standard", "both"}))
      ->capture_default_str();
  run->add_option("--out", run_out, "Output path, - for stdout")->capture_default_str();
  run->add_option("--format", run_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  run->add_option("--config", config_path, "key=value file; flags override it");

  ScenarioFlags t_f;
  int iters = 10, threads = 0;
  std::string N_list = "6,9", costs = "quad,nonconvex,setdist", t_out, t_format = "csv", agg_out = "-";
  auto* table1 = app.add_subcommand("table1", "Full protocol: seeds x N-list x cost kinds x both policies");
  t_f.attach(table1);
  table1->add_option("--iters", iters, "Seeds seed..seed+iters-1")->check(CLI::PositiveNumber)->capture_default_str();
  table1->add_option("--N-list", N_list, "Comma-separated previews")->capture_default_str();
  table1->add_option("--costs", costs, "Comma-separated cost kinds")->capture_default_str();
  table1->add_option("--out", t_out, "Row report path (omitted: not written)");
  table1->add_option("--format", t_format, "csv or json")->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  table1->add_option("--agg-out", agg_out, "Aggregate table path, - for stdout")->capture_default_str();
  table1->add_option("--threads", threads, "Workers (0: PRHC_THREADS or all cores)")->check(CLI::NonNegativeNumber);
  table1->add_option("--config", config_path, "key=value file; flags override it");

  std::string c_in, c_out = "-";
  bool rerun = false;
  auto* certify_cmd = app.add_subcommand("certify", "Re-check a stored JSON report against the gain bound");
  certify_cmd->add_option("--in", c_in, "JSON report")->required()->check(CLI::ExistingFile);
  certify_cmd->add_flag("--rerun", rerun, "Regenerate each scenario and compare J");
  certify_cmd->add_option("--out", c_out, "Output path, - for stdout")->capture_default_str();

  ScenarioFlags o_f;
  o_f.T = 3;
  o_f.N = 3;
  o_f.n = 1;
  OracleOptions oo;
  bool no_refine = false;
  std::string o_out = "-";
  auto* oracle = app.add_subcommand("oracle", "Brute-force grid optimum on a tiny scenario");
  o_f.attach(oracle);
  oracle->add_option("--grid-res", oo.grid_res, "Grid spacing")->check(CLI::PositiveNumber)->capture_default_str();
  oracle->add_option("--u-box", oo.u_box, "Inputs searched in [-u_box, u_box]")->check(CLI::PositiveNumber)
      ->capture_default_str();
  oracle->add_option("--max-points", oo.max_points, "Exhaustive grid limit")->capture_default_str();
  oracle->add_flag("--no-refine", no_refine, "Fail instead of coarse-to-fine search when over budget");
  oracle->add_option("--out", o_out, "Output path, - for stdout")->capture_default_str();
  oracle->add_option("--config", config_path, "key=value file; flags override it");

  std::string a_in, a_out = "-";
  double gamma_scale = 1.0, tol = 1e-6;
  auto* audit = app.add_subcommand("audit", "Per-interval recursion audit of a stored JSON report");
  audit->add_option("--in", a_in, "JSON report")->required()->check(CLI::ExistingFile);
  audit->add_option("--gamma-scale", gamma_scale, "Multiply gamma_bar^2 before auditing")
      ->check(CLI::PositiveNumber)->capture_default_str();
  audit->add_option("--tol", tol, "Slack tolerance")->capture_default_str();
  audit->add_option("--out", a_out, "Output path, - for stdout")->capture_default_str();

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = merge_config(args);
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }

  try {
    if (*run) return cmd_run(run_f, run_M, m_rule, run_out, run_format);
    if (*table1) return cmd_table1(t_f, iters, N_list, costs, t_out, t_format, agg_out, threads);
    if (*certify_cmd) return cmd_certify(c_in, rerun, c_out);
    if (*oracle) {
      oo.refine = !no_refine;
      return cmd_oracle(o_f, oo, o_out);
    }
    if (*audit) return cmd_audit(a_in, gamma_scale, tol, a_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
