#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "prhc/harness/experiment.hpp"
#include "prhc/harness/oracle.hpp"
#include "prhc/harness/report_io.hpp"
#include "prhc/policy.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace prhc;
using namespace prhc::harness;
using namespace prhc::test;

TEST_CASE("gen_scenario is deterministic and respects its ranges")
{
  ScenarioConfig cfg;
  const auto a = gen_scenario(7, cfg);
  const auto b = gen_scenario(7, cfg);
  CHECK(a.sys.A() == b.sys.A());
  for (Index t = 0; t < cfg.T; ++t) CHECK(a.w_full[t] == b.w_full[t]);
  CHECK(gen_scenario(8, cfg).sys.A() != a.sys.A());

  CHECK(a.sys.A().minCoeff() >= 0);
  CHECK(a.sys.A().maxCoeff() <= 1);
  CHECK(a.sys.B() == default_input_matrix(2, 1));
  const auto& q = dynamic_cast<const QuadraticCost<double>&>(*a.costs);
  for (Index t = 0; t < cfg.T; ++t) {
    CHECK(q.Q(t).diagonal().minCoeff() >= 1);
    CHECK(q.Q(t).diagonal().maxCoeff() <= 3);
    CHECK(q.R(t).diagonal().minCoeff() >= 1);
    CHECK(q.R(t).diagonal().maxCoeff() <= 3);
    CHECK(a.w_full[t].minCoeff() >= 0);
    CHECK(a.w_full[t].maxCoeff() <= 1);
  }
}

TEST_CASE("gen_scenario shares A and w across cost kinds")
{
  ScenarioConfig cfg;
  const auto q = gen_scenario(3, cfg);
  cfg.cost = CostKind::set_distance;
  const auto s = gen_scenario(3, cfg);
  CHECK(q.sys.A() == s.sys.A());
  for (Index t = 0; t < cfg.T; ++t) CHECK(q.w_full[t] == s.w_full[t]);
  CHECK(s.costs->kind() == "setdist");
  CHECK(s.costs->sigma(v({0.5, 0.5})) == 0);
  CHECK(s.costs->sigma(v({0.5, 1.0})) == doctest::Approx(0.0625));
}

TEST_CASE("default_input_matrix")
{
  CHECK(default_input_matrix(3, 1) == Mat::Ones(3, 1));
  CHECK(default_input_matrix(2, 2) == Mat::Identity(2, 2));
}

TEST_CASE("config validation and name parsing")
{
  ScenarioConfig cfg;
  cfg.N = 20;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.cost = CostKind::nonconvex;
  cfg.n = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(parse_cost_kind("setdist") == CostKind::set_distance);
  CHECK(to_string(CostKind::quadratic) == "quad");
  CHECK_THROWS_AS(parse_cost_kind("cubic"), std::invalid_argument);
  CHECK(parse_family("stress") == Family::stress);
  CHECK_THROWS_AS(parse_format("xml"), std::invalid_argument);
}

TEST_CASE("stress draws satisfy their own constraints")
{
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = gen_stress_scenario(seed);
    const auto& sc = d.scenario;
    const double beta = d.alpha_lo / d.alpha_hi;
    CHECK(double(d.M) > 1 / (beta * beta));
    CHECK(2 * d.M <= sc.N());
    CHECK(2 * sc.N() <= sc.T());
    for (Index t = 0; t < sc.onset; ++t) CHECK(sc.w_full[t].isZero(0));
  }
}

TEST_CASE("zero disturbance gives an undefined gain")
{
  ScenarioConfig cfg;
  cfg.w_lo = cfg.w_hi = 0;
  const auto sc = gen_scenario(1, cfg);
  const auto rows = run_comparison(sc);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.energy == 0);
    CHECK(std::isnan(r.gain));
  }
}

TEST_CASE("oracle: scalar two-step example")
{
  const LinearSystem<double> sys(scalar(1), scalar(1));
  const auto costs = constant_quadratic(scalar(1), scalar(1), 2);
  const auto res = brute_force_oracle(sys, *costs, zeros(1, 2), v({1}), 2);
  CHECK(res.exhaustive);
  CHECK(res.J == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(res.u[0](0) == doctest::Approx(-0.5));
  CHECK(std::abs(res.u[1](0)) < 1e-12);
}

TEST_CASE("oracle: zero cost")
{
  const LinearSystem<double> sys(scalar(1), scalar(1));
  OracleOptions o;
  o.grid_res = 0.1;
  const auto res = brute_force_oracle(sys, ZeroCost<double>{}, zeros(1, 2), v({1}), 2, o);
  CHECK(res.J == 0);
  CHECK(res.u[0].norm() == 0);
}

TEST_CASE("oracle: refinement reaches the full-preview optimum")
{
  const LinearSystem<double> sys(scalar(1), scalar(1));
  const std::shared_ptr<const CostModel<double>> costs = constant_quadratic(scalar(1), scalar(1), 3);
  const DisturbanceSequence<double> w({v({0.1}), v({0.1}), v({0.1})}, 1.0);
  const auto res = brute_force_oracle(sys, *costs, w, v({1}), 3);
  CHECK_FALSE(res.exhaustive);
  const auto opt = run_standard_rhc<double>(sys, costs, w, v({1}), 3, 3, SolverConfig<double>{});
  CHECK(res.J >= opt.J - 1e-12);
  CHECK(res.J - opt.J <= 1e-6);
}

TEST_CASE("oracle: budget exceeded without refinement")
{
  const LinearSystem<double> sys(scalar(1), scalar(1));
  const auto costs = constant_quadratic(scalar(1), scalar(1), 3);
  OracleOptions o;
  o.refine = false;
  o.max_points = 1e4;
  CHECK_THROWS_AS(brute_force_oracle(sys, *costs, zeros(1, 3), v({1}), 3, o), std::length_error);
}

TEST_CASE("report csv layout")
{
  ExperimentReport empty;
  CHECK(rows_to_csv(empty.rows) == std::string(kRowHeader) + "\n");

  ReportRow r;
  r.seed = 4;
  r.cost_kind = "quad";
  r.policy = "overlap";
  r.n = 2;
  r.m = 1;
  r.T = 15;
  r.N = 6;
  r.M = 3;
  r.J = 1.25;
  r.energy = 0.5;
  r.gain = 2.5;
  r.beta = std::nan("");
  r.gamma_bar_sq = 3;
  r.bound = std::numeric_limits<double>::infinity();
  const auto csv = rows_to_csv({r});
  CHECK(csv == std::string(kRowHeader) + "\n4,quad,overlap,2,1,15,6,3,1.25,0.5,2.5,nan,3,false,0,inf,false,false\n");
}

TEST_CASE("number formatting round-trips")
{
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 1e308, 0.0}) CHECK(parse_number(format_number(x)) == x);
  CHECK(std::isnan(parse_number("nan")));
  CHECK(parse_number("-inf") == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(parse_number("1.0x"), std::invalid_argument);
}

TEST_CASE("config text parsing")
{
  const auto c = parse_config_text("# header\nseed = 3\n\ncost=setdist  # trailing\nseed=5\n");
  REQUIRE(c.size() == 2);
  CHECK(c[0] == std::make_pair(std::string("seed"), std::string("5")));
  CHECK(c[1] == std::make_pair(std::string("cost"), std::string("setdist")));
  CHECK_THROWS_AS(parse_config_text("novalue\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("=1\n"), std::invalid_argument);
}

TEST_CASE("run_table1: deterministic across thread counts, sorted, aggregated")
{
  Table1Options opts;
  opts.seeds = {0, 1, 2};
  opts.N_list = {6, 9};
  opts.costs = {CostKind::quadratic, CostKind::set_distance};
  opts.threads = 1;
  auto a = run_table1(opts);
  opts.threads = 3;
  auto b = run_table1(opts);
  CHECK(identical(a, b));
  CHECK(report_to_json(a) == report_to_json(b));

  REQUIRE(a.rows.size() == 3 * 2 * 2 * 2);
  auto sorted = a.rows;
  sort_rows(sorted);
  for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(identical(sorted[i], a.rows[i]));

  REQUIRE(a.aggregates.size() == 2 * 2 * 2);
  for (const auto& c : a.aggregates) {
    CHECK(c.iterations == 3);
    CHECK(c.bound_violations <= c.bound_checks);
    CHECK(c.dg == doctest::Approx(c.mean_J / c.mean_energy));
  }

  const auto back = report_from_json(report_to_json(a));
  CHECK(identical(back, a));
}

TEST_CASE("aggregate: hand-built rows")
{
  std::vector<ReportRow> rows(3);
  for (std::size_t i = 0; i < 3; ++i) {
    rows[i].seed = i;
    rows[i].cost_kind = "quad";
    rows[i].policy = "overlap";
    rows[i].N = 6;
    rows[i].J = double(i + 1);
    rows[i].energy = 1;
    rows[i].gain = double(i + 1);
    rows[i].beta = 0.5;
    rows[i].gamma_bar_sq = 2;
  }
  rows[2].certified = true;
  rows[2].bound = 1;
  rows[2].satisfied = false;
  const auto cells = aggregate(rows);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].iterations == 3);
  CHECK(cells[0].mean_J == doctest::Approx(2));
  CHECK(cells[0].mean_gain == doctest::Approx(2));
  CHECK(cells[0].bound_checks == 1);
  CHECK(cells[0].bound_violations == 1);
  CHECK(cells[0].two_beta_gamma_bar_sq == doctest::Approx(2));
  CHECK(cells[0].two_over_beta_gamma_bar_sq == doctest::Approx(8));
}
