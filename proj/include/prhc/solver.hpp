#pragma once

#include "prhc/costs.hpp"
#include "prhc/linsys.hpp"

#include <Eigen/Cholesky>

#include <deque>
#include <memory>
#include <optional>
#include <random>

namespace prhc {

/**
 * @brief One instance of the finite-horizon cost-to-go problem.
 *
 * Minimise sum_{k=0}^{N-1} c_{offset+k}(x_k, u_k) subject to
 * x_{k+1} = A x_k + B u_k + w_k, x_0 = x0, with the preview w known.
 */
template<typename Scalar>
struct HorizonProblem
{
  LinearSystem<Scalar> sys;
  VectorX<Scalar> x0;
  std::shared_ptr<const CostModel<Scalar>> costs;
  Index offset = 0;
  DisturbanceSequence<Scalar> w_preview;
  Index N = 1;

  void validate() const
  {
    detail::require(N >= 1, "HorizonProblem: N must be >= 1");
    detail::require(costs != nullptr, "HorizonProblem: no cost model");
    detail::require(w_preview.size() == N, "HorizonProblem: preview length " + std::to_string(w_preview.size()) +
                                               " != N = " + std::to_string(N));
    detail::require(x0.size() == sys.n(), "HorizonProblem: x0 has wrong dimension");
    detail::require(x0.allFinite(), "HorizonProblem: x0 not finite");
    detail::require(costs->covers(offset, N), "HorizonProblem: cost sequence does not cover the window");
    for (const auto& w : w_preview.w) detail::require(w.size() == sys.n(), "HorizonProblem: preview has wrong dimension");
  }

  Index dim() const { return sys.m() * N; }
};

template<typename Scalar>
struct SolverConfig
{
  int max_iters = 500;
  Scalar grad_tol = Scalar(1e-8);
  Scalar initial_step = Scalar(1);
  Scalar shrink = Scalar(0.5);
  Scalar armijo = Scalar(1e-4);
  int max_backtracks = 60;
  int memory = 12;         // L-BFGS pairs
  int restarts = 5;        // extra starts, non-convex models only
  Scalar restart_scale = Scalar(0.5);
  std::uint64_t seed = 0;
  bool warm_start = true;  // used by the policy between intervals

  void validate() const
  {
    detail::require(max_iters >= 1, "SolverConfig: max_iters must be >= 1");
    detail::require(grad_tol > 0, "SolverConfig: grad_tol must be positive");
    detail::require(initial_step > 0 && shrink > 0 && shrink < 1, "SolverConfig: bad step rule");
    detail::require(armijo > 0 && armijo < 1, "SolverConfig: sufficient-decrease constant must lie in (0,1)");
    detail::require(restarts >= 0 && memory >= 1, "SolverConfig: bad restart/memory count");
  }
};

template<typename Scalar>
struct HorizonSolution
{
  std::vector<VectorX<Scalar>> u_opt;
  Scalar value{};
  bool converged = false;
  int iterations = 0;
  Scalar stationarity{};
  std::vector<Scalar> cost_history;  // accepted iterates of the winning start
};

class SolverError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Predicted states x_0..x_{N-1} of the window under the stacked controls U.
template<typename Scalar>
std::vector<VectorX<Scalar>> predict_states(const HorizonProblem<Scalar>& p, const VectorX<Scalar>& U)
{
  const Index m = p.sys.m();
  std::vector<VectorX<Scalar>> xs;
  xs.reserve(static_cast<std::size_t>(p.N) + 1);
  xs.push_back(p.x0);
  for (Index k = 0; k < p.N; ++k) {
    xs.push_back(p.sys.A() * xs.back() + p.sys.B() * U.segment(k * m, m) + p.w_preview[k]);
  }
  return xs;
}

template<typename Scalar>
Scalar horizon_cost(const HorizonProblem<Scalar>& p, const VectorX<Scalar>& U)
{
  const Index m = p.sys.m();
  const auto xs = predict_states(p, U);
  Scalar J(0);
  for (Index k = 0; k < p.N; ++k) {
    J += p.costs->eval(p.offset + k, xs[static_cast<std::size_t>(k)], U.segment(k * m, m));
  }
  return J;
}

/**
 * Gradient of the horizon cost with respect to the stacked controls via the
 * backward costate recursion: lambda_N = 0,
 * lambda_k = dc_k/dx + A' lambda_{k+1}, dJ/du_k = dc_k/du + B' lambda_{k+1}.
 */
template<typename Scalar>
VectorX<Scalar> adjoint_gradient(const HorizonProblem<Scalar>& p, const VectorX<Scalar>& U)
{
  detail::require(U.size() == p.dim(), "adjoint_gradient: control vector has wrong size");
  const Index n = p.sys.n();
  const Index m = p.sys.m();
  const auto xs = predict_states(p, U);
  VectorX<Scalar> grad(p.dim());
  VectorX<Scalar> lambda = VectorX<Scalar>::Zero(n);
  VectorX<Scalar> gx, gu;
  for (Index k = p.N - 1; k >= 0; --k) {
    p.costs->gradient(p.offset + k, xs[static_cast<std::size_t>(k)], U.segment(k * m, m), gx, gu);
    grad.segment(k * m, m) = gu + p.sys.B().transpose() * lambda;
    lambda = gx + p.sys.A().transpose() * lambda;
    if (!lambda.allFinite() || !grad.segment(k * m, m).allFinite()) {
      throw SolverError("adjoint_gradient: non-finite costate at stage " + std::to_string(k));
    }
  }
  return grad;
}

namespace detail {

template<typename Scalar>
HorizonSolution<Scalar> package(const HorizonProblem<Scalar>& p, const VectorX<Scalar>& U)
{
  HorizonSolution<Scalar> s;
  s.u_opt = unstack<Scalar>(U, p.sys.m());
  s.value = horizon_cost(p, U);
  return s;
}

template<typename Scalar>
MatrixX<Scalar> block_diagonal(const std::vector<const MatrixX<Scalar>*>& blocks)
{
  Index rows = 0;
  for (const auto* b : blocks) rows += b->rows();
  MatrixX<Scalar> D = MatrixX<Scalar>::Zero(rows, rows);
  Index off = 0;
  for (const auto* b : blocks) {
    D.block(off, off, b->rows(), b->cols()) = *b;
    off += b->rows();
  }
  return D;
}

}  // namespace detail

/// Block-diagonal stacks of Q_t and R_t over the window.
template<typename Scalar>
std::pair<MatrixX<Scalar>, MatrixX<Scalar>> stacked_weights(const QuadraticCost<Scalar>& q, Index offset, Index N)
{
  std::vector<const MatrixX<Scalar>*> Qs, Rs;
  for (Index k = 0; k < N; ++k) {
    Qs.push_back(&q.Q(offset + k));
    Rs.push_back(&q.R(offset + k));
  }
  return {detail::block_diagonal(Qs), detail::block_diagonal(Rs)};
}

/**
 * Exact minimiser for quadratic stage costs from the condensed normal equations
 * (G' Qb G + Rb) U = -G' Qb (F x0 + H w).
 */
template<typename Scalar>
HorizonSolution<Scalar> solve_quadratic(const HorizonProblem<Scalar>& p)
{
  p.validate();
  const auto* q = dynamic_cast<const QuadraticCost<Scalar>*>(p.costs.get());
  detail::require(q != nullptr, "solve_quadratic: cost model is not quadratic");
  const auto sd = stack_dynamics(p.sys, p.N);
  const auto [Qb, Rb] = stacked_weights(*q, p.offset, p.N);
  const VectorX<Scalar> free = sd.F * p.x0 + sd.H * stack(p.w_preview.w);
  const MatrixX<Scalar> K = sd.G.transpose() * Qb * sd.G + Rb;
  Eigen::LLT<MatrixX<Scalar>> llt(K);
  if (llt.info() != Eigen::Success) throw SolverError("solve_quadratic: normal matrix is not positive definite");
  const VectorX<Scalar> U = -llt.solve(sd.G.transpose() * (Qb * free));
  if (!U.allFinite()) throw SolverError("solve_quadratic: non-finite solution");
  auto s = detail::package(p, U);
  s.converged = true;
  s.iterations = 0;
  s.stationarity = adjoint_gradient(p, U).template lpNorm<Eigen::Infinity>();
  return s;
}

namespace detail {

/// One L-BFGS descent run with Armijo backtracking; the accepted costs never increase.
template<typename Scalar>
HorizonSolution<Scalar> descend(const HorizonProblem<Scalar>& p, const SolverConfig<Scalar>& cfg, VectorX<Scalar> U)
{
  using Vec = VectorX<Scalar>;
  HorizonSolution<Scalar> out;
  Scalar f = horizon_cost(p, U);
  if (!std::isfinite(f)) throw SolverError("solve_general: non-finite cost at iterate 0");
  Vec g = adjoint_gradient(p, U);
  out.cost_history.push_back(f);

  std::deque<std::pair<Vec, Vec>> pairs;  // (s, y)
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    if (g.template lpNorm<Eigen::Infinity>() <= cfg.grad_tol) break;

    // Two-loop recursion.
    Vec d = -g;
    std::vector<Scalar> alphas(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
      const auto& [s, y] = pairs[i];
      alphas[i] = s.dot(d) / y.dot(s);
      d -= alphas[i] * y;
    }
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      d *= s.dot(y) / y.squaredNorm();
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& [s, y] = pairs[i];
      const Scalar b = y.dot(d) / y.dot(s);
      d += (alphas[i] - b) * s;
    }
    Scalar slope = g.dot(d);
    if (!(slope < 0)) {
      pairs.clear();
      d = -g;
      slope = -g.squaredNorm();
    }

    Scalar step = pairs.empty() ? std::min(cfg.initial_step, Scalar(1) / std::max(Scalar(1), g.norm())) : cfg.initial_step;
    bool accepted = false;
    Vec U_new;
    Scalar f_new{};
    for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
      U_new = U + step * d;
      f_new = horizon_cost(p, U_new);
      if (std::isfinite(f_new) && f_new <= f + cfg.armijo * step * slope) {
        accepted = true;
        break;
      }
      step *= cfg.shrink;
    }
    if (!accepted) break;  // no further decrease representable

    Vec g_new = adjoint_gradient(p, U_new);
    Vec s = U_new - U;
    Vec y = g_new - g;
    if (s.dot(y) > std::numeric_limits<Scalar>::epsilon() * s.norm() * y.norm()) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(pairs.size()) > cfg.memory) pairs.pop_front();
    }
    U = std::move(U_new);
    g = std::move(g_new);
    f = f_new;
    out.cost_history.push_back(f);
  }

  out.u_opt = unstack<Scalar>(U, p.sys.m());
  out.value = f;
  out.iterations = it;
  out.stationarity = g.template lpNorm<Eigen::Infinity>();
  out.converged = out.stationarity <= cfg.grad_tol;
  return out;
}

}  // namespace detail

/**
 * @brief First-order solve for general costs.
 *
 * L-BFGS directions under an Armijo backtracking rule, started from `guess`
 * (zero when absent). Non-convex models get `cfg.restarts` further starts
 * from Gaussian perturbations of the guess; the lowest value wins, ties
 * broken by smaller control energy. For non-convex costs the value is an
 * upper bound on the true infimum.
 */
template<typename Scalar>
HorizonSolution<Scalar> solve_general(const HorizonProblem<Scalar>& p, const SolverConfig<Scalar>& cfg,
                                      const std::optional<VectorX<Scalar>>& guess = std::nullopt)
{
  p.validate();
  cfg.validate();
  const VectorX<Scalar> U0 = guess ? *guess : VectorX<Scalar>(VectorX<Scalar>::Zero(p.dim()));
  detail::require(U0.size() == p.dim(), "solve_general: initial guess has wrong size");

  auto best = detail::descend(p, cfg, U0);
  if (p.costs->convex()) return best;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<Scalar> normal(Scalar(0), cfg.restart_scale);
  const auto energy = [](const HorizonSolution<Scalar>& s) {
    Scalar e(0);
    for (const auto& u : s.u_opt) e += u.squaredNorm();
    return e;
  };
  for (int r = 0; r < cfg.restarts; ++r) {
    VectorX<Scalar> start = U0;
    for (Index i = 0; i < start.size(); ++i) start(i) += normal(rng);
    auto cand = detail::descend(p, cfg, start);
    const Scalar tol = Scalar(1e-12) * (Scalar(1) + std::abs(best.value));
    if (cand.value < best.value - tol || (std::abs(cand.value - best.value) <= tol && energy(cand) < energy(best))) {
      best = std::move(cand);
    }
  }
  return best;
}

/// Closed form when the model is quadratic and `closed_form` is set, iterative otherwise.
template<typename Scalar>
HorizonSolution<Scalar> solve(const HorizonProblem<Scalar>& p, const SolverConfig<Scalar>& cfg,
                              const std::optional<VectorX<Scalar>>& guess = std::nullopt, bool closed_form = true)
{
  if (closed_form && dynamic_cast<const QuadraticCost<Scalar>*>(p.costs.get()) != nullptr) return solve_quadratic(p);
  return solve_general(p, cfg, guess);
}

}  // namespace prhc
