#pragma once

#include "prhc/solver.hpp"

#include <Eigen/SVD>

namespace prhc {

template<typename Scalar>
struct GammaAlphaEstimate
{
  Scalar alpha_hi{};
  Scalar gamma_bar_sq{};
  bool certified = false;
  std::size_t samples = 0;  // sample budget spent; 0 on the exact path
};

template<typename Scalar>
struct CertificateSampling
{
  std::size_t sample_budget = 128;
  Scalar x_box = Scalar(2);      // x ~ U[-x_box, x_box]^n
  Scalar w_cap = Scalar(-1);     // ball radius for w; negative selects 1
  Index grid_points = 64;        // gamma_bar^2 candidates
  Index T = 0;                   // window starts for time-invariant models
  bool truncate_tail = true;     // windows near the end shrink instead of being skipped
  std::uint64_t seed = 0;
  SolverConfig<Scalar> solver{};
};

/**
 * Quadratic form of the optimal cost-to-go: V(x, w) = z' P z with z = [x; w_0..w_{N-1}].
 *
 * With d = F x + H w and K = G' Qb G + Rb, the minimum of (d + G U)' Qb (d + G U) + U' Rb U
 * is d' (Qb - Qb G K^{-1} G' Qb) d.
 */
template<typename Scalar>
MatrixX<Scalar> quadratic_value_form(const LinearSystem<Scalar>& sys, const QuadraticCost<Scalar>& q, Index offset,
                                     Index N)
{
  detail::require(q.covers(offset, N), "quadratic_value_form: window outside the cost sequence");
  const auto sd = stack_dynamics(sys, N);
  const auto [Qb, Rb] = stacked_weights(q, offset, N);
  const MatrixX<Scalar> K = sd.G.transpose() * Qb * sd.G + Rb;
  Eigen::LLT<MatrixX<Scalar>> llt(K);
  if (llt.info() != Eigen::Success) throw SolverError("quadratic_value_form: normal matrix is not positive definite");
  const MatrixX<Scalar> QG = Qb * sd.G;
  const MatrixX<Scalar> S = Qb - QG * llt.solve(QG.transpose());
  MatrixX<Scalar> E(sd.F.rows(), sd.F.cols() + sd.H.cols());
  E << sd.F, sd.H;
  MatrixX<Scalar> P = E.transpose() * S * E;
  return Scalar(0.5) * (P + P.transpose());
}

namespace detail {

template<typename Scalar>
std::vector<std::pair<Index, Index>> certificate_windows(Index length, Index N, bool truncate)
{
  std::vector<std::pair<Index, Index>> out;  // (start, window length)
  for (Index t = 0; t < length; ++t) {
    const Index L = std::min(N, length - t);
    if (L < N && !truncate) break;
    out.emplace_back(t, L);
  }
  return out;
}

template<typename Scalar>
Scalar spectral_norm(const MatrixX<Scalar>& M)
{
  if (M.size() == 0) return Scalar(0);
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(M);
  return svd.singularValues()(0);
}

}  // namespace detail

/**
 * @brief Smallest (alpha_hi, gamma_bar^2) with V_t(x, w) <= alpha_hi sigma(x) + gamma_bar^2 sum ||w_k||^2.
 *
 * QuadraticCost: exact. For each window the cross block is split with
 * Cauchy-Schwarz, alpha_hi = lambda_max(P_xx) + ||P_xw||, gamma_bar^2 =
 * lambda_max(P_ww) + ||P_xw||, maximised over windows.
 *
 * Other models: V is sampled at random (t, x, w) and the pair minimising
 * alpha_hi + gamma_bar^2 on a geometric gamma grid is returned, flagged
 * certified = false.
 */
template<typename Scalar>
GammaAlphaEstimate<Scalar> estimate_gamma_alpha_upper(const LinearSystem<Scalar>& sys,
                                                      const std::shared_ptr<const CostModel<Scalar>>& costs, Index N,
                                                      const CertificateSampling<Scalar>& opts = {})
{
  detail::require(costs != nullptr, "estimate_gamma_alpha_upper: no cost model");
  detail::require(N >= 1, "estimate_gamma_alpha_upper: N must be >= 1");
  const Index length = costs->length() ? *costs->length() : opts.T;
  detail::require(length >= 1, "estimate_gamma_alpha_upper: time-invariant model needs opts.T");
  const auto windows = detail::certificate_windows<Scalar>(length, N, opts.truncate_tail);
  detail::require(!windows.empty(), "estimate_gamma_alpha_upper: no admissible window");
  const Index n = sys.n();

  if (const auto* q = dynamic_cast<const QuadraticCost<Scalar>*>(costs.get())) {
    GammaAlphaEstimate<Scalar> est{Scalar(0), Scalar(0), true, 0};
    for (const auto& [t, L] : windows) {
      const MatrixX<Scalar> P = quadratic_value_form(sys, *q, t, L);
      const Scalar cross = detail::spectral_norm<Scalar>(P.topRightCorner(n, n * L));
      est.alpha_hi = std::max(est.alpha_hi, detail::max_eigenvalue<Scalar>(P.topLeftCorner(n, n)) + cross);
      est.gamma_bar_sq =
          std::max(est.gamma_bar_sq, detail::max_eigenvalue<Scalar>(P.bottomRightCorner(n * L, n * L)) + cross);
    }
    if (!(est.alpha_hi > 0)) throw std::domain_error("estimate_gamma_alpha_upper: alpha_hi = 0, beta undefined");
    return est;
  }

  detail::require(opts.sample_budget >= 1, "estimate_gamma_alpha_upper: sample_budget must be >= 1");
  detail::require(opts.grid_points >= 2, "estimate_gamma_alpha_upper: need at least two grid points");
  const Scalar w_cap = opts.w_cap < 0 ? Scalar(1) : opts.w_cap;

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<Scalar> unit(Scalar(0), Scalar(1));
  std::normal_distribution<Scalar> normal(Scalar(0), Scalar(1));
  std::uniform_int_distribution<std::size_t> pick(0, windows.size() - 1);

  struct Sample
  {
    Scalar V, sigma, energy;
  };
  std::vector<Sample> samples;
  samples.reserve(opts.sample_budget);
  for (std::size_t s = 0; s < opts.sample_budget; ++s) {
    const auto [t, L] = windows[pick(rng)];
    VectorX<Scalar> x(n);
    for (Index i = 0; i < n; ++i) x(i) = opts.x_box * (Scalar(2) * unit(rng) - Scalar(1));
    std::vector<VectorX<Scalar>> w(static_cast<std::size_t>(L), VectorX<Scalar>::Zero(n));
    if (s % 4 != 0) {  // every fourth sample probes the disturbance-free case
      for (auto& wk : w) {
        VectorX<Scalar> dir(n);
        for (Index i = 0; i < n; ++i) dir(i) = normal(rng);
        const Scalar r = w_cap * std::pow(unit(rng), Scalar(1) / Scalar(n));
        wk = dir.norm() > 0 ? VectorX<Scalar>(r * dir / dir.norm()) : dir;
      }
    }
    HorizonProblem<Scalar> p{sys, x, costs, t, DisturbanceSequence<Scalar>(w, w_cap), L};
    auto cfg = opts.solver;
    cfg.seed = opts.seed + 7919 * (s + 1);
    const auto sol = solve_general(p, cfg);
    Scalar e(0);
    for (const auto& wk : w) e += wk.squaredNorm();
    samples.push_back({sol.value, costs->sigma(x), e});
  }

  Scalar g_max(0);
  for (const auto& s : samples) {
    if (s.energy > 0) g_max = std::max(g_max, s.V / s.energy);
  }
  std::vector<Scalar> grid{Scalar(0)};
  if (g_max > 0) {
    const Scalar lo = g_max * Scalar(1e-6);
    for (Index k = 0; k < opts.grid_points - 1; ++k) {
      grid.push_back(lo * std::pow(g_max / lo, Scalar(k) / Scalar(opts.grid_points - 2)));
    }
  }

  bool found = false;
  GammaAlphaEstimate<Scalar> best{std::numeric_limits<Scalar>::infinity(), std::numeric_limits<Scalar>::infinity(),
                                  false, opts.sample_budget};
  for (const Scalar g : grid) {
    bool feasible = true;
    Scalar a(0);
    for (const auto& s : samples) {
      const Scalar excess = s.V - g * s.energy;
      if (s.sigma > 0) {
        a = std::max(a, excess / s.sigma);
      } else if (excess > Scalar(1e-12) * (Scalar(1) + s.V)) {
        feasible = false;
        break;
      }
    }
    if (feasible && a + g < best.alpha_hi + best.gamma_bar_sq) {
      best.alpha_hi = a;
      best.gamma_bar_sq = g;
      found = true;
    }
  }
  if (!found) {
    throw std::domain_error("estimate_gamma_alpha_upper: a sample has V > 0 with sigma(x) = 0 and no disturbance");
  }
  if (!(best.alpha_hi > 0)) throw std::domain_error("estimate_gamma_alpha_upper: alpha_hi = 0, beta undefined");
  return best;
}

}  // namespace prhc
