#include "prhc/harness/scenario.hpp"

#include "prhc/assumptions.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace prhc::harness {

std::string_view to_string(CostKind kind)
{
  switch (kind) {
    case CostKind::quadratic: return "quad";
    case CostKind::nonconvex: return "nonconvex";
    case CostKind::set_distance: return "setdist";
  }
  return "?";
}

CostKind parse_cost_kind(std::string_view name)
{
  if (name == "quad" || name == "quadratic") return CostKind::quadratic;
  if (name == "nonconvex") return CostKind::nonconvex;
  if (name == "setdist" || name == "set_distance") return CostKind::set_distance;
  throw std::invalid_argument("unknown cost kind '" + std::string(name) + "' (expected quad|nonconvex|setdist)");
}

std::string_view to_string(Family f) { return f == Family::protocol ? "protocol" : "stress"; }

Family parse_family(std::string_view name)
{
  if (name == "protocol") return Family::protocol;
  if (name == "stress") return Family::stress;
  throw std::invalid_argument("unknown family '" + std::string(name) + "' (expected protocol|stress)");
}

void ScenarioConfig::validate() const
{
  detail::require(n >= 1 && m >= 1, "ScenarioConfig: n and m must be >= 1");
  detail::require(T >= 1 && N >= 1 && N <= T, "ScenarioConfig: need 1 <= N <= T");
  detail::require(A_lo <= A_hi && w_lo <= w_hi, "ScenarioConfig: inverted range");
  detail::require(weight_lo > 0 && weight_lo <= weight_hi, "ScenarioConfig: weights must be positive");
  detail::require(ball_radius > 0, "ScenarioConfig: ball radius must be positive");
  detail::require(a_min >= 0 && a_min < 1, "ScenarioConfig: a_min must lie in [0, 1)");
  detail::require(cost != CostKind::nonconvex || n >= 2, "ScenarioConfig: the nonconvex cost needs n >= 2");
}

Matrix default_input_matrix(Index n, Index m)
{
  Matrix B = Matrix::Zero(n, m);
  for (Index i = 0; i < n; ++i) B(i, i % m) = 1.0;
  return B;
}

namespace {

std::shared_ptr<const CostModel<double>> draw_costs(std::mt19937_64& rng, const ScenarioConfig& c)
{
  switch (c.cost) {
    case CostKind::quadratic: {
      std::uniform_real_distribution<double> wt(c.weight_lo, c.weight_hi);
      std::vector<Matrix> Q, R;
      for (Index t = 0; t < c.T; ++t) {
        Vector q(c.n), r(c.m);
        for (Index i = 0; i < c.n; ++i) q(i) = wt(rng);
        for (Index i = 0; i < c.m; ++i) r(i) = wt(rng);
        Q.emplace_back(q.asDiagonal());
        R.emplace_back(r.asDiagonal());
      }
      return std::make_shared<QuadraticCost<double>>(std::move(Q), std::move(R));
    }
    case CostKind::nonconvex: return std::make_shared<NonConvexCost<double>>(c.b);
    case CostKind::set_distance: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::vector<double> a(static_cast<std::size_t>(c.T));
      for (int attempt = 0;; ++attempt) {
        if (attempt > 10000) throw std::runtime_error("gen_scenario: could not draw a_t above a_min");
        for (auto& v : a) v = unit(rng);
        if (*std::min_element(a.begin(), a.end()) >= c.a_min) break;
      }
      return std::make_shared<SetDistanceCost<double>>(a, Vector::Constant(c.n, c.ball_center), c.ball_radius);
    }
  }
  throw std::logic_error("draw_costs: unreachable");
}

}  // namespace

Scenario gen_scenario(std::uint64_t seed, const ScenarioConfig& config)
{
  config.validate();
  if (config.family == Family::stress) {
    detail::require(config.cost == CostKind::quadratic, "gen_scenario: the stress family is quadratic only");
    return gen_stress_scenario(seed, config.onset).scenario;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> a_dist(config.A_lo, config.A_hi);
  std::uniform_real_distribution<double> w_dist(config.w_lo, config.w_hi);

  Matrix A(config.n, config.n);
  for (Index i = 0; i < config.n; ++i)
    for (Index j = 0; j < config.n; ++j) A(i, j) = a_dist(rng);

  std::vector<Vector> w(static_cast<std::size_t>(config.T), Vector(config.n));
  for (auto& wt : w)
    for (Index i = 0; i < config.n; ++i) wt(i) = w_dist(rng);
  const double cap = std::sqrt(double(config.n)) * std::max(std::abs(config.w_lo), std::abs(config.w_hi));

  auto costs = draw_costs(rng, config);
  return Scenario{seed,
                  config,
                  LinearSystem<double>(A, default_input_matrix(config.n, config.m)),
                  std::move(costs),
                  DisturbanceSequence<double>(std::move(w), cap),
                  Vector::Zero(config.n),
                  0};
}

StressDraw gen_stress_scenario(std::uint64_t seed, bool onset)
{
  std::mt19937_64 rng(seed ^ 0x5eed5eedULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const auto integer = [&](Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng); };

  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Index n = integer(1, 3);
    Matrix A(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) A(i, j) = uniform(-0.1, 0.1);
    const Index T = integer(24, 30);
    const double q = uniform(1.0, 2.0);
    const double r = uniform(0.02, 0.2);
    std::vector<Matrix> Q, R;
    for (Index t = 0; t < T; ++t) {
      Vector dq(n), dr(n);
      for (Index i = 0; i < n; ++i) dq(i) = q * uniform(1.0, 1.05);
      for (Index i = 0; i < n; ++i) dr(i) = r * uniform(1.0, 1.05);
      Q.emplace_back(dq.asDiagonal());
      R.emplace_back(dr.asDiagonal());
    }
    const Index N = integer(8, 12);
    const Index on = integer(N, T - N);  // only used when onset is requested; drawn always to keep streams aligned
    std::vector<Vector> w(static_cast<std::size_t>(T), Vector::Zero(n));
    for (Index t = 0; t < T; ++t) {
      Vector wt(n);
      for (Index i = 0; i < n; ++i) wt(i) = unit(rng);
      if (!onset || t >= on) w[static_cast<std::size_t>(t)] = wt;
    }
    if (2 * N > T) continue;

    auto costs = std::make_shared<QuadraticCost<double>>(std::move(Q), std::move(R));
    LinearSystem<double> sys(A, Matrix::Identity(n, n));
    const auto lo = estimate_alpha_lower<double>(*costs);
    const auto hi = estimate_gamma_alpha_upper<double>(sys, costs, N);
    const double beta = lo.value / hi.alpha_hi;
    const Index M = static_cast<Index>(std::floor(1.0 / (beta * beta))) + 1;
    if (2 * M > N || !(beta * beta * double(M) > 1.0)) continue;

    ScenarioConfig cfg;
    cfg.family = Family::stress;
    cfg.cost = CostKind::quadratic;
    cfg.n = n;
    cfg.m = n;
    cfg.T = T;
    cfg.N = N;
    cfg.A_lo = -0.1;
    cfg.A_hi = 0.1;
    cfg.onset = onset;
    Scenario sc{seed, cfg, sys, costs, DisturbanceSequence<double>(std::move(w), std::sqrt(double(n))),
                Vector::Zero(n), onset ? on : 0};
    return StressDraw{std::move(sc), M, lo.value, hi.alpha_hi, hi.gamma_bar_sq};
  }
  throw std::runtime_error("gen_stress_scenario: no admissible draw for seed " + std::to_string(seed));
}

}  // namespace prhc::harness
