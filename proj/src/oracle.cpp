#include "prhc/harness/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace prhc::harness {

namespace {

struct Evaluator
{
  const LinearSystem<double>& sys;
  const CostModel<double>& costs;
  const DisturbanceSequence<double>& w;
  const Vector& x1;
  Index T;
  mutable Vector x, xn, u;  // scratch, reused across calls

  double operator()(const Vector& U) const
  {
    const Index m = sys.m();
    x = x1;
    double J = 0;
    for (Index t = 0; t < T; ++t) {
      u = U.segment(t * m, m);
      J += costs.eval(t, x, u);
      xn.noalias() = sys.A() * x;
      xn.noalias() += sys.B() * u;
      xn += w[t];
      x.swap(xn);
    }
    return J;
  }
};

// Enumerates center + s * k, k in [-K, K]^D, clipped to the box; updates best.
void scan(const Evaluator& f, const Vector& center, double s, Index K, double box, Vector& best, double& best_J,
          double& evals)
{
  const Index D = center.size();
  std::vector<Index> k(static_cast<std::size_t>(D), -K);
  Vector U(D);
  for (;;) {
    bool inside = true;
    for (Index d = 0; d < D; ++d) {
      U(d) = center(d) + s * double(k[static_cast<std::size_t>(d)]);
      if (std::abs(U(d)) > box * (1 + 1e-12)) inside = false;
    }
    if (inside) {
      const double J = f(U);
      evals += 1;
      if (J < best_J || (J == best_J && U.squaredNorm() < best.squaredNorm())) {
        best_J = J;
        best = U;
      }
    }
    Index d = 0;
    while (d < D && ++k[static_cast<std::size_t>(d)] > K) k[static_cast<std::size_t>(d++)] = -K;
    if (d == D) break;
  }
}

}  // namespace

OracleResult brute_force_oracle(const LinearSystem<double>& sys, const CostModel<double>& costs,
                                const DisturbanceSequence<double>& w, const Vector& x1, Index T,
                                const OracleOptions& opts)
{
  detail::require(opts.grid_res > 0 && opts.u_box > 0, "brute_force_oracle: grid_res and u_box must be positive");
  detail::require(T >= 1 && w.size() >= T && costs.covers(0, T), "brute_force_oracle: data shorter than T");
  detail::require(x1.size() == sys.n(), "brute_force_oracle: x1 has wrong dimension");

  const Index D = T * sys.m();
  const Evaluator f{sys, costs, w, x1, T, Vector(sys.n()), Vector(sys.n()), Vector(sys.m())};
  const Index K_full = static_cast<Index>(std::llround(opts.u_box / opts.grid_res));
  const double full_points = std::pow(double(2 * K_full + 1), double(D));

  OracleResult out;
  Vector best = Vector::Zero(D);
  double best_J = std::numeric_limits<double>::infinity();

  if (full_points <= opts.max_points) {
    scan(f, Vector::Zero(D), opts.grid_res, K_full, opts.u_box, best, best_J, out.evaluations);
    out.exhaustive = true;
    out.spacing = opts.grid_res;
  } else {
    if (!opts.refine) {
      throw std::length_error("brute_force_oracle: " + std::to_string(full_points) + " grid points exceed the budget of " +
                              std::to_string(opts.max_points));
    }
    const double per_level = std::min(opts.level_points, opts.max_points);
    const Index K = std::max<Index>(1, static_cast<Index>((std::floor(std::pow(per_level, 1.0 / double(D))) - 1) / 2));
    double s = opts.u_box / double(K);
    Vector center = Vector::Zero(D);
    for (;;) {
      scan(f, center, s, K, opts.u_box, best, best_J, out.evaluations);
      if (s <= opts.grid_res) break;
      center = best;
      s = std::max(opts.grid_res, 2 * s / double(K));
    }
    out.spacing = s;
  }
  out.J = best_J;
  out.u = unstack(best, sys.m());
  return out;
}

OracleResult brute_force_oracle(const Scenario& sc, const OracleOptions& opts)
{
  return brute_force_oracle(sc.sys, *sc.costs, sc.w_full, sc.x1, sc.T(), opts);
}

}  // namespace prhc::harness
