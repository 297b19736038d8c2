#pragma once

#include "prhc/policy.hpp"

#include <limits>

namespace prhc {

class StabilityThresholdError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

namespace detail {

template<typename Scalar>
void require_beta(Scalar beta, const char* who)
{
  if (!(beta > 0) || !(beta <= 1)) {
    throw std::domain_error(std::string(who) + ": beta must lie in (0, 1], got " + std::to_string(beta));
  }
}

template<typename Scalar>
void require_stable(Scalar beta, Index M, const char* who)
{
  require_beta(beta, who);
  if (!(beta * beta * Scalar(M) > Scalar(1))) {
    throw StabilityThresholdError(std::string(who) + ": stability threshold violated, need M > 1/beta^2 (M = " +
                                  std::to_string(M) + ", 1/beta^2 = " + std::to_string(1 / (beta * beta)) + ")");
  }
}

}  // namespace detail

/// kappa(M) = 3/(beta M) + 1/(beta M)^2 - 1/M
template<typename Scalar>
Scalar kappa(Scalar beta, Index M)
{
  detail::require_beta(beta, "kappa");
  detail::require(M >= 1, "kappa: M must be >= 1");
  const Scalar bm = beta * Scalar(M);
  return Scalar(3) / bm + Scalar(1) / (bm * bm) - Scalar(1) / Scalar(M);
}

/// omega_op = (2 - beta + kappa(M)) / (beta (1 - 1/(beta^2 M))), defined for M > 1/beta^2.
template<typename Scalar>
Scalar omega_op(Scalar beta, Index M)
{
  detail::require_stable(beta, M, "omega_op");
  return (Scalar(2) - beta + kappa(beta, M)) / (beta * (Scalar(1) - Scalar(1) / (beta * beta * Scalar(M))));
}

/// Contraction factor a = 1 + beta (1/(beta^2 M) - 1); lies in (0, 1) when M > 1/beta^2.
template<typename Scalar>
Scalar a_factor(Scalar beta, Index M)
{
  detail::require_stable(beta, M, "a_factor");
  const Scalar a = Scalar(1) + beta * (Scalar(1) / (beta * beta * Scalar(M)) - Scalar(1));
  if (!(a > 0 && a < 1)) throw std::logic_error("a_factor: a = " + std::to_string(a) + " outside (0, 1)");
  return a;
}

template<typename Scalar>
struct Theorem1Bound
{
  Scalar gamma_op_sq{};
  Scalar rho{};
  Scalar rho_envelope{};  // C/N' bound on rho
  bool rho_within_envelope = false;
};

/**
 * gamma_op^2 = (2 zeta + rho(N)) gamma_bar^2 with M = floor(N/2) and
 * rho(N) = omega_op(beta, floor(N/2)) - 2 zeta.
 *
 * Hypotheses: zeta > 1, beta >= 1/zeta, N > 4 zeta^3.
 * The envelope is C/N' with N' = 2 floor(N/2) and
 * C = [(6 - 2 beta)/beta + 4/(beta^2 N')] * 2 zeta^2/(2 zeta - 1). It holds when
 * N' > 4 zeta^3; an odd N just above 4 zeta^3 can exceed it, which is reported, not thrown.
 */
template<typename Scalar>
Theorem1Bound<Scalar> theorem1_bound(const AssumptionParams<Scalar>& params, Index N)
{
  const Scalar beta = params.beta;
  const Scalar zeta = params.zeta;
  if (!(zeta > 1)) throw std::domain_error("theorem1_bound: zeta > 1 violated (zeta = " + std::to_string(zeta) + ")");
  if (!(beta * zeta >= Scalar(1) - Scalar(1e-12))) {
    throw std::domain_error("theorem1_bound: beta >= 1/zeta violated (margin " + std::to_string(beta - 1 / zeta) + ")");
  }
  const Scalar need = Scalar(4) * zeta * zeta * zeta;
  if (!(Scalar(N) > need)) {
    throw std::domain_error("theorem1_bound: N > 4 zeta^3 violated (N = " + std::to_string(N) +
                            ", 4 zeta^3 = " + std::to_string(need) + ")");
  }
  Theorem1Bound<Scalar> out;
  const Scalar omega = omega_op(beta, half_overlap(N));
  out.gamma_op_sq = omega * params.gamma_bar_sq;
  out.rho = omega - Scalar(2) * zeta;
  const Scalar Ne = Scalar(2 * half_overlap(N));
  const Scalar C =
      ((Scalar(6) - Scalar(2) * beta) / beta + Scalar(4) / (beta * beta * Ne)) * Scalar(2) * zeta * zeta / (Scalar(2) * zeta - Scalar(1));
  out.rho_envelope = C / Ne;
  out.rho_within_envelope = out.rho <= out.rho_envelope;
  return out;
}

/// J / sum_t ||w_t||^2 over the run's horizon.
template<typename Scalar>
Scalar disturbance_gain(const RunResult<Scalar>& result, const DisturbanceSequence<Scalar>& w_full)
{
  const Scalar energy = w_full.energy(0, result.schedule.T);
  if (!(energy > 0)) throw std::domain_error("disturbance_gain: gain undefined for zero disturbance energy");
  return result.J / energy;
}

template<typename Scalar>
struct ConditionCheck
{
  std::string name;
  bool satisfied = false;
  Scalar margin{};  // positive when satisfied
};

template<typename Scalar>
struct GainCertificate
{
  Scalar J{};
  Scalar energy{};
  Scalar gain = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar omega_op = std::numeric_limits<Scalar>::infinity();
  Scalar bound = std::numeric_limits<Scalar>::infinity();
  std::vector<ConditionCheck<Scalar>> conditions;
  bool conditions_met = false;
  bool satisfied = false;
  bool truncated_tail = false;
  bool certified_params = false;
};

/**
 * Checks J <= alpha_hi/(1-a) sigma(x_1) + omega_op gamma_bar^2 sum ||w_t||^2.
 *
 * Hypotheses N >= 2M, M > 1/beta^2 and T > N are recorded with margins; if any
 * fails the bound is +inf and the certificate is not satisfied. The
 * comparison allows 1e-9 relative slack.
 */
template<typename Scalar>
GainCertificate<Scalar> certify(const RunResult<Scalar>& result, const AssumptionParams<Scalar>& params,
                                const RhcSchedule& sched, Scalar sigma_x1)
{
  GainCertificate<Scalar> c;
  c.J = result.J;
  for (const auto& w : result.traj.disturbances) c.energy += w.squaredNorm();
  c.gain = c.energy > 0 ? c.J / c.energy : std::numeric_limits<Scalar>::quiet_NaN();
  c.truncated_tail = result.truncated_tail;
  c.certified_params = params.certified;

  const Scalar beta = params.beta;
  c.conditions.push_back({"N >= 2M", sched.N >= 2 * sched.M, Scalar(sched.N - 2 * sched.M)});
  c.conditions.push_back({"M > 1/beta^2", beta > 0 && beta * beta * Scalar(sched.M) > 1,
                          beta > 0 ? Scalar(sched.M) - Scalar(1) / (beta * beta) : -std::numeric_limits<Scalar>::infinity()});
  c.conditions.push_back({"T > N", sched.T > sched.N, Scalar(sched.T - sched.N)});
  c.conditions_met = std::all_of(c.conditions.begin(), c.conditions.end(), [](const auto& k) { return k.satisfied; });
  if (!c.conditions_met) return c;

  c.omega_op = omega_op(beta, sched.M);
  const Scalar a = a_factor(beta, sched.M);
  c.bound = params.alpha_hi / (Scalar(1) - a) * sigma_x1 + c.omega_op * params.gamma_bar_sq * c.energy;
  c.satisfied = c.J <= c.bound * (Scalar(1) + Scalar(1e-9));
  return c;
}

template<typename Scalar>
struct RecursionAudit
{
  std::vector<Scalar> slacks;      // one per consecutive full-window pair (i, i+1)
  std::vector<Index> pair_index;   // i (0-based) of each slack
  std::vector<Scalar> values;      // freshly solved V_i at x_{t_i}
  Scalar a{};
  Scalar min_slack = std::numeric_limits<Scalar>::infinity();
  bool flagged = false;            // some slack below -tol
};

/**
 * Re-solves V_i at each realised x_{t_i} and evaluates, for consecutive
 * full-window intervals,
 *   slack_i = a V_i + beta g sum_{[t_i, t_{i+1})} ||w||^2
 *           + (1 + beta) g sum_{[t_{i+1}, t_{i+1}+M)} ||w||^2
 *           + g sum_{[t_{i+1}+M, t_{i+1}+N)} ||w||^2 - V_{i+1},   g = gamma_bar^2.
 * Nonnegative slacks are implied by the assumptions when params hold.
 */
template<typename Scalar>
RecursionAudit<Scalar> recursion_audit(const RunResult<Scalar>& result, const AssumptionParams<Scalar>& params,
                                       const LinearSystem<Scalar>& sys,
                                       const std::shared_ptr<const CostModel<Scalar>>& costs,
                                       const DisturbanceSequence<Scalar>& w_full, const SolverConfig<Scalar>& cfg = {},
                                       Scalar tol = Scalar(1e-6))
{
  const auto& sched = result.schedule;
  RecursionAudit<Scalar> audit;
  audit.a = a_factor(params.beta, sched.M);
  const Scalar g = params.gamma_bar_sq;
  const Scalar beta = params.beta;

  // Full windows only: t_i - 1 + N <= T.
  Index full = 0;
  while (full < sched.intervals() && sched.begin(full) + sched.N <= sched.T) ++full;
  for (Index i = 0; i < full; ++i) {
    const Index t0 = sched.begin(i);
    HorizonProblem<Scalar> p{sys, result.interval_states[static_cast<std::size_t>(i)], costs, t0,
                             w_full.slice(t0, sched.N), sched.N};
    auto local = cfg;
    local.seed = cfg.seed + 15485863ULL * static_cast<std::uint64_t>(i + 1);
    try {
      audit.values.push_back(solve(p, local).value);
    } catch (const std::exception& e) {
      throw PolicyError(i, std::string("recursion_audit: ") + e.what());
    }
  }
  for (Index i = 0; i + 1 < full; ++i) {
    const Index ti = sched.begin(i);
    const Index tn = sched.begin(i + 1);
    const Scalar rhs = audit.a * audit.values[static_cast<std::size_t>(i)] + beta * g * w_full.energy(ti, tn) +
                       (Scalar(1) + beta) * g * w_full.energy(tn, tn + sched.M) +
                       g * w_full.energy(tn + sched.M, tn + sched.N);
    const Scalar slack = rhs - audit.values[static_cast<std::size_t>(i + 1)];
    audit.slacks.push_back(slack);
    audit.pair_index.push_back(i);
    audit.min_slack = std::min(audit.min_slack, slack);
  }
  audit.flagged = !audit.slacks.empty() && audit.min_slack < -tol;
  return audit;
}

}  // namespace prhc
