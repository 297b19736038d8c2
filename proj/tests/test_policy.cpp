#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "prhc/policy.hpp"
#include "test_util.hpp"

using namespace prhc;
using namespace prhc::test;

namespace {

std::vector<Index> t_list(Index N, Index M, Index T) { return build_schedule(N, M, T).t_list; }

/// Exhaustive grid over u in [-box, box]^T (scalar input), spacing h.
double grid_minimum(const LinearSystem<double>& sys, const CostModel<double>& c, const DisturbanceSequence<double>& w,
                    double x1, Index T, double h, double box, Vec center)
{
  const Index K = static_cast<Index>(std::llround(box / h));
  std::vector<Index> k(static_cast<std::size_t>(T), -K);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    double x = x1, J = 0;
    for (Index t = 0; t < T; ++t) {
      const double u = center(t) + h * double(k[static_cast<std::size_t>(t)]);
      J += c.eval(t, Vec::Constant(1, x), Vec::Constant(1, u));
      x = sys.A()(0, 0) * x + sys.B()(0, 0) * u + w[t](0);
    }
    best = std::min(best, J);
    Index d = 0;
    while (d < T && ++k[static_cast<std::size_t>(d)] > K) k[static_cast<std::size_t>(d++)] = -K;
    if (d == T) break;
  }
  return best;
}

}  // namespace

TEST_CASE("build_schedule examples")
{
  CHECK(t_list(6, 3, 15) == std::vector<Index>{1, 4, 7, 10, 13});
  CHECK(t_list(6, 5, 8) == std::vector<Index>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(t_list(4, 2, 5) == std::vector<Index>{1, 3, 5});
  const auto s = build_schedule(6, 3, 15);
  CHECK(s.period() == 3);
  CHECK(s.begin(4) == 12);
  CHECK(s.end(4) == 15);
}

TEST_CASE("build_schedule names the violated condition")
{
  const auto message = [](Index N, Index M, Index T) {
    try {
      build_schedule(N, M, T);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(4, 4, 10).find("M < N") != std::string::npos);
  CHECK(message(4, 0, 10).find("M >= 1") != std::string::npos);
  CHECK(message(11, 5, 10).find("N <= T") != std::string::npos);
}

TEST_CASE("schedule invariants over a grid of (N, M, T)")
{
  for (Index T = 1; T <= 20; ++T)
    for (Index N = 2; N <= T; ++N)
      for (Index M = 1; M < N; ++M) {
        const auto s = build_schedule(N, M, T);
        REQUIRE(!s.t_list.empty());
        CHECK(s.t_list.front() == 1);
        CHECK(s.t_list.back() <= T);
        CHECK(s.t_list.back() + (N - M) > T);
        for (std::size_t i = 1; i < s.t_list.size(); ++i) CHECK(s.t_list[i] - s.t_list[i - 1] == N - M);
      }
  CHECK(half_overlap(9) == 4);
  CHECK(half_overlap(6) == 3);
}

TEST_CASE("zero disturbance from the origin costs nothing")
{
  std::mt19937_64 rng(71);
  const LinearSystem<double> sys(random_matrix(rng, 2, 2), Mat::Ones(2, 1));
  const Index T = 12;
  const std::vector<std::shared_ptr<const CostModel<double>>> models{
      random_quadratic(rng, 2, 1, T),
      std::make_shared<SetDistanceCost<double>>(std::vector<double>(T, 0.5), Vec::Zero(2), 0.25)};
  for (const auto& c : models) {
    for (Index M : {Index(1), Index(3), Index(5)}) {
      const auto r = run_policy<double>(sys, c, zeros(2, T), Vec::Zero(2), build_schedule(6, M, T), SolverConfig<double>{});
      CHECK(r.J == doctest::Approx(0).epsilon(1e-14));
      for (const auto& u : r.traj.inputs) CHECK(u.norm() <= 1e-12);
    }
  }
}

TEST_CASE("N = T: one interval, J equals the full-horizon optimum")
{
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 1 + trial % 3, T = 4 + trial % 5;
    const LinearSystem<double> sys(random_matrix(rng, n, n, 0.9), random_matrix(rng, n, 1));
    auto q = random_quadratic(rng, n, 1, T);
    const auto w = random_disturbances(rng, n, T);
    const Vec x1 = random_matrix(rng, n, 1);
    const auto V1 = solve_quadratic<double>(HorizonProblem<double>{sys, x1, q, 0, w, T}).value;
    for (Index M = 1; M < T; ++M) {
      const auto r = run_policy<double>(sys, q, w, x1, build_schedule(T, M, T), SolverConfig<double>{});
      CHECK(r.J == doctest::Approx(V1).epsilon(1e-9));
    }
  }
}

TEST_CASE("scalar T=4 run matches an exhaustive grid")
{
  const LinearSystem<double> sys(scalar(1), scalar(1));
  auto q = constant_quadratic(scalar(1), scalar(1), 4);
  const DisturbanceSequence<double> w({v({0.1}), v({0}), v({0.1}), v({0})}, 1.0);
  const auto overlap = run_policy<double>(sys, q, w, v({0}), build_schedule(2, 1, 4), SolverConfig<double>{});
  const auto standard = run_standard_rhc<double>(sys, q, w, v({0}), 2, 4, SolverConfig<double>{});
  CHECK(overlap.J == doctest::Approx(standard.J).epsilon(1e-12));

  // Grid minimum over all four inputs: coarse pass then a 1e-3 pass around the closed-form plan.
  const auto full = solve_quadratic<double>(HorizonProblem<double>{sys, v({0}), q, 0, w, 4});
  const double grid = grid_minimum(sys, *q, w, 0.0, 4, 1e-3, 0.03, stack(full.u_opt));
  const double coarse = grid_minimum(sys, *q, w, 0.0, 4, 0.05, 0.5, Vec::Zero(4));
  CHECK(grid <= coarse);
  // A preview-limited policy may lose to the open-loop optimum but never beats it.
  CHECK(overlap.J >= grid - 1e-3);
  CHECK(full.value == doctest::Approx(grid).epsilon(1e-5));
}

TEST_CASE("applied inputs are the stored plans verbatim; one solve per interval")
{
  std::mt19937_64 rng(79);
  const Index T = 17, N = 6;
  const LinearSystem<double> sys(random_matrix(rng, 2, 2, 0.8), Mat::Ones(2, 1));
  auto nc = std::make_shared<NonConvexCost<double>>(0.2);
  const auto w = random_disturbances(rng, 2, T, 0.5);
  for (Index M : {Index(2), Index(3), Index(5)}) {
    const auto s = build_schedule(N, M, T);
    const auto r = run_policy<double>(sys, nc, w, Vec::Zero(2), s, SolverConfig<double>{});
    CHECK(r.solver_calls == static_cast<std::size_t>(s.intervals()));
    CHECK(r.interval_solutions.size() == static_cast<std::size_t>(s.intervals()));
    for (Index i = 0; i < s.intervals(); ++i) {
      for (Index t = s.begin(i); t < s.end(i); ++t) {
        const auto& planned = r.interval_solutions[static_cast<std::size_t>(i)].u_opt[static_cast<std::size_t>(t - s.begin(i))];
        CHECK((r.traj.inputs[static_cast<std::size_t>(t)].array() == planned.array()).all());
      }
    }
    CHECK(r.max_prediction_error <= 1e-9);
    CHECK(validate_trajectory(sys, r.traj) <= 1e-12);
    double sum = 0;
    for (double c : r.traj.stage_costs) sum += c;
    CHECK(r.J == doctest::Approx(sum).epsilon(1e-9));
  }
}

TEST_CASE("tail windows are truncated at T")
{
  std::mt19937_64 rng(83);
  const LinearSystem<double> sys(random_matrix(rng, 1, 1), scalar(1));
  auto q = random_quadratic(rng, 1, 1, 15);
  const auto r = run_policy<double>(sys, q, random_disturbances(rng, 1, 15), v({0}), build_schedule(6, 3, 15),
                            SolverConfig<double>{});
  CHECK(r.truncated_tail);
  CHECK(r.window_lengths == std::vector<Index>{6, 6, 6, 6, 3});
  CHECK(r.traj.horizon() == 15);

  PolicyOptions strict;
  strict.truncate_tail = false;
  CHECK_THROWS_AS(run_policy<double>(sys, q, random_disturbances(rng, 1, 15), v({0}), build_schedule(6, 3, 15),
                             SolverConfig<double>{}, strict),
                  PolicyError);
}

TEST_CASE("policy errors carry the interval index")
{
  struct FailsLate final : CostModel<double>
  {
    double eval(Index t, const Vec& x, const Vec& u) const override
    {
      return t >= 6 ? std::numeric_limits<double>::quiet_NaN() : x.squaredNorm() + u.squaredNorm();
    }
    double sigma(const Vec& x) const override { return x.squaredNorm(); }
    std::string_view kind() const override { return "fails-late"; }
    bool convex() const override { return true; }
  };
  const LinearSystem<double> sys(scalar(0.5), scalar(1));
  try {
    run_policy<double>(sys, std::make_shared<FailsLate>(), zeros(1, 12), v({1}), build_schedule(4, 2, 12),
                       SolverConfig<double>{});
    FAIL("expected PolicyError");
  } catch (const PolicyError& e) {
    CHECK(e.interval() == 2);
    CHECK(std::string(e.what()).find("interval 3") != std::string::npos);
  }
}

TEST_CASE("run_policy input validation")
{
  const LinearSystem<double> sys(scalar(1), scalar(1));
  auto q = constant_quadratic(scalar(1), scalar(1), 10);
  const auto s = build_schedule(4, 2, 10);
  CHECK_THROWS_AS(run_policy<double>(sys, q, zeros(1, 9), v({0}), s, {}), std::invalid_argument);
  CHECK_THROWS_AS(run_policy<double>(sys, q, zeros(1, 10), v({0, 0}), s, {}), std::invalid_argument);
  CHECK_THROWS_AS(run_policy<double>(sys, nullptr, zeros(1, 10), v({0}), s, {}), std::invalid_argument);
  auto short_q = constant_quadratic(scalar(1), scalar(1), 8);
  CHECK_THROWS_AS(run_policy<double>(sys, short_q, zeros(1, 10), v({0}), s, {}), std::invalid_argument);
}

TEST_CASE("runs are deterministic")
{
  std::mt19937_64 rng(89);
  const LinearSystem<double> sys(random_matrix(rng, 2, 2, 0.8), Mat::Ones(2, 1));
  auto nc = std::make_shared<NonConvexCost<double>>(0.2);
  const auto w = random_disturbances(rng, 2, 15, 0.5);
  const auto s = build_schedule(6, 3, 15);
  const auto a = run_policy<double>(sys, nc, w, Vec::Zero(2), s, SolverConfig<double>{});
  const auto b = run_policy<double>(sys, nc, w, Vec::Zero(2), s, SolverConfig<double>{});
  CHECK(a.J == b.J);
  for (std::size_t t = 0; t < a.traj.inputs.size(); ++t) CHECK(a.traj.inputs[t] == b.traj.inputs[t]);
}
