#pragma once

#include "prhc/solver.hpp"

namespace prhc {

/**
 * Interval structure of the overlap receding-horizon policy.
 *
 * Re-planning happens at t_i = (i-1)(N-M)+1 (1-based, as stored in t_list),
 * so consecutive plans share M steps and each plan is followed for N-M steps.
 */
struct RhcSchedule
{
  Index N = 0;
  Index M = 0;
  Index T = 0;
  std::vector<Index> t_list;

  Index period() const { return N - M; }
  Index intervals() const { return static_cast<Index>(t_list.size()); }
  /// 0-based first step of interval i and one past its last applied step.
  Index begin(Index i) const { return t_list[static_cast<std::size_t>(i)] - 1; }
  Index end(Index i) const { return std::min(begin(i) + period(), T); }
};

inline RhcSchedule build_schedule(Index N, Index M, Index T)
{
  if (M < 1) throw std::invalid_argument("build_schedule: overlap M = " + std::to_string(M) + " violates M >= 1");
  if (M >= N) {
    throw std::invalid_argument("build_schedule: overlap M = " + std::to_string(M) + " violates M < N = " +
                                std::to_string(N));
  }
  if (N > T) {
    throw std::invalid_argument("build_schedule: preview N = " + std::to_string(N) + " violates N <= T = " +
                                std::to_string(T));
  }
  RhcSchedule s{N, M, T, {}};
  for (Index t = 1; t <= T; t += N - M) s.t_list.push_back(t);
  return s;
}

/// M = floor(N/2): keeps N >= 2M for odd N.
inline Index half_overlap(Index N) { return N / 2; }

struct PolicyOptions
{
  bool truncate_tail = true;     // shrink windows that would run past T
  bool closed_form = true;       // exact solve for quadratic costs
  double prediction_tol = 1e-9;  // realised vs planned state at t_{i+1}
};

template<typename Scalar>
struct RunResult
{
  Trajectory<Scalar> traj;
  Scalar J{};
  std::vector<Scalar> interval_values;
  std::vector<HorizonSolution<Scalar>> interval_solutions;
  std::vector<VectorX<Scalar>> interval_states;  // x_{t_i}
  std::vector<Index> window_lengths;
  RhcSchedule schedule;
  bool truncated_tail = false;
  std::size_t solver_calls = 0;
  Scalar max_prediction_error{};
};

class PolicyError : public std::runtime_error
{
public:
  PolicyError(Index interval, const std::string& what)
      : std::runtime_error("interval " + std::to_string(interval + 1) + ": " + what), interval_(interval)
  {}
  Index interval() const { return interval_; }

private:
  Index interval_;
};

/**
 * Closed-loop rollout of the overlap policy.
 *
 * At each t_i the window c_{t_i..t_i+N-1}, w_{t_i..t_i+N-1} is solved once and
 * its first N-M inputs are applied verbatim. With exact preview the realised
 * state at t_{i+1} must equal the plan's prediction; a mismatch throws.
 */
template<typename Scalar>
RunResult<Scalar> run_policy(const LinearSystem<Scalar>& sys, const std::shared_ptr<const CostModel<Scalar>>& costs,
                             const DisturbanceSequence<Scalar>& w_full, const VectorX<Scalar>& x1,
                             const RhcSchedule& sched, const SolverConfig<Scalar>& cfg, const PolicyOptions& opts = {})
{
  detail::require(costs != nullptr, "run_policy: no cost model");
  detail::require(w_full.size() >= sched.T, "run_policy: disturbance sequence shorter than T");
  detail::require(x1.size() == sys.n(), "run_policy: x1 has wrong dimension");
  detail::require(costs->covers(0, sched.T), "run_policy: cost sequence shorter than T");
  const Index m = sys.m();

  RunResult<Scalar> res;
  res.schedule = sched;
  res.traj.states.push_back(x1);
  VectorX<Scalar> x = x1;
  std::optional<VectorX<Scalar>> warm;

  for (Index i = 0; i < sched.intervals(); ++i) {
    const Index t0 = sched.begin(i);
    Index L = sched.N;
    if (t0 + L > sched.T) {
      if (opts.truncate_tail) {
        L = sched.T - t0;
        res.truncated_tail = true;
      } else if (t0 + L > w_full.size() || !costs->covers(t0, L)) {
        throw PolicyError(i, "preview runs past the available data and tail truncation is disabled");
      }
    }

    HorizonProblem<Scalar> p{sys, x, costs, t0, w_full.slice(t0, L), L};
    if (warm && warm->size() != p.dim()) warm->conservativeResize(p.dim());
    auto local = cfg;
    local.seed = cfg.seed + 104729ULL * static_cast<std::uint64_t>(i);
    HorizonSolution<Scalar> sol;
    try {
      sol = solve(p, local, cfg.warm_start ? warm : std::nullopt, opts.closed_form);
    } catch (const std::exception& e) {
      throw PolicyError(i, e.what());
    }
    ++res.solver_calls;

    const Index stop = sched.end(i);
    for (Index t = t0; t < stop; ++t) {
      const auto& u = sol.u_opt[static_cast<std::size_t>(t - t0)];
      res.traj.inputs.push_back(u);
      res.traj.disturbances.push_back(w_full[t]);
      x = step(sys, x, u, w_full[t]);
      res.traj.states.push_back(x);
    }

    const VectorX<Scalar> U = stack(sol.u_opt);
    if (stop - t0 < L) {
      const auto planned = predict_states(p, U)[static_cast<std::size_t>(stop - t0)];
      const Scalar err = (planned - x).norm() / (Scalar(1) + x.norm());
      res.max_prediction_error = std::max(res.max_prediction_error, err);
      if (err > Scalar(opts.prediction_tol)) throw PolicyError(i, "realised state departs from the plan");
    }

    // Warm start: shift by N-M, zero-fill.
    const Index shift = sched.period() * m;
    VectorX<Scalar> next = VectorX<Scalar>::Zero(sched.N * m);
    if (U.size() > shift) next.head(U.size() - shift) = U.tail(U.size() - shift);
    warm = next;

    res.interval_states.push_back(p.x0);
    res.interval_values.push_back(sol.value);
    res.window_lengths.push_back(L);
    res.interval_solutions.push_back(std::move(sol));
  }

  res.J = total_cost(res.traj, *costs);
  return res;
}

/// Recompute every step with the full preview: M = N - 1.
template<typename Scalar>
RunResult<Scalar> run_standard_rhc(const LinearSystem<Scalar>& sys,
                                   const std::shared_ptr<const CostModel<Scalar>>& costs,
                                   const DisturbanceSequence<Scalar>& w_full, const VectorX<Scalar>& x1, Index N,
                                   Index T, const SolverConfig<Scalar>& cfg, const PolicyOptions& opts = {})
{
  return run_policy(sys, costs, w_full, x1, build_schedule(N, N - 1, T), cfg, opts);
}

}  // namespace prhc
