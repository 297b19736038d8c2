#pragma once

#include "prhc/costs.hpp"
#include "prhc/linsys.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace prhc::harness {

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

enum class CostKind
{
  quadratic,
  nonconvex,
  set_distance
};

std::string_view to_string(CostKind kind);
CostKind parse_cost_kind(std::string_view name);  // quad | nonconvex | setdist

enum class Family
{
  protocol,  // A and w entries uniform on [0,1]
  stress     // small-gain family with certified beta near 1
};

std::string_view to_string(Family f);
Family parse_family(std::string_view name);

/// Ranges and sizes for scenario draws; n = 2, m = 1 by default.
struct ScenarioConfig
{
  CostKind cost = CostKind::quadratic;
  Family family = Family::protocol;
  Index n = 2;
  Index m = 1;
  Index T = 15;
  Index N = 6;
  double A_lo = 0.0, A_hi = 1.0;
  double w_lo = 0.0, w_hi = 1.0;
  double weight_lo = 1.0, weight_hi = 3.0;  // diagonal Q_t, R_t entries
  double b = 0.2;
  double ball_center = 0.5;
  double ball_radius = 0.25;
  double a_min = 0.05;                      // redraw a_t sequences whose minimum is smaller
  bool onset = true;                        // stress family: quiet prefix before the disturbance starts

  void validate() const;
};

struct Scenario
{
  std::uint64_t seed = 0;
  ScenarioConfig config;
  LinearSystem<double> sys;
  std::shared_ptr<const CostModel<double>> costs;
  DisturbanceSequence<double> w_full;
  Vector x1;
  Index onset = 0;  // first 0-based step with nonzero disturbance (stress family)

  Index T() const { return config.T; }
  Index N() const { return config.N; }
};

/// B(i, i mod m) = 1: the all-ones column for m = 1, the identity for m = n.
Matrix default_input_matrix(Index n, Index m);

/**
 * Deterministic draw from (seed, config). A and the disturbances are drawn
 * before any cost parameter, so one seed shares A and w across cost kinds
 * and horizons.
 */
Scenario gen_scenario(std::uint64_t seed, const ScenarioConfig& config);

/**
 * Stress family for bound validation: n = m in {1,2,3}, B = I, small A,
 * near-constant Q_t, R_t with cheap inputs, quadratic cost. N and T are
 * drawn and M = floor(1/beta^2) + 1 from the exact certificate; draws with
 * N < 2M or T < 2N are rejected and redrawn from a derived seed. With
 * `onset`, disturbances are zero before a step drawn in [N, T - N].
 */
struct StressDraw
{
  Scenario scenario;
  Index M = 0;
  double alpha_lo = 0, alpha_hi = 0, gamma_bar_sq = 0;
};
StressDraw gen_stress_scenario(std::uint64_t seed, bool onset = true);

}  // namespace prhc::harness
