#pragma once

#include "prhc/linsys.hpp"

#include <Eigen/Eigenvalues>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prhc {

/**
 * @brief Time-varying stage cost c_t(x, u) together with its state weight sigma(x).
 *
 * Time indices are 0-based offsets into the cost sequence: eval(0, ...) is c_1.
 * Implementations must be nonnegative and satisfy eval(t, x, u) >= alpha_lo * sigma(x).
 * The default gradient is a central finite difference; models with a closed-form
 * gradient override it and report has_gradient() == true.
 */
template<typename Scalar>
class CostModel
{
public:
  using Vector = VectorX<Scalar>;

  virtual ~CostModel() = default;

  virtual Scalar eval(Index t, const Vector& x, const Vector& u) const = 0;
  virtual Scalar sigma(const Vector& x) const = 0;
  virtual std::string_view kind() const = 0;

  /// Number of stage costs defined, or nullopt for a time-invariant model.
  virtual std::optional<Index> length() const { return std::nullopt; }
  virtual bool convex() const { return false; }
  virtual bool has_gradient() const { return false; }

  virtual void gradient(Index t, const Vector& x, const Vector& u, Vector& gx, Vector& gu) const
  {
    constexpr Scalar h = Scalar(1e-6);
    gx.resize(x.size());
    gu.resize(u.size());
    Vector xp = x;
    for (Index i = 0; i < x.size(); ++i) {
      xp(i) = x(i) + h;
      const Scalar fp = eval(t, xp, u);
      xp(i) = x(i) - h;
      const Scalar fm = eval(t, xp, u);
      xp(i) = x(i);
      gx(i) = (fp - fm) / (2 * h);
    }
    Vector up = u;
    for (Index i = 0; i < u.size(); ++i) {
      up(i) = u(i) + h;
      const Scalar fp = eval(t, x, up);
      up(i) = u(i) - h;
      const Scalar fm = eval(t, x, up);
      up(i) = u(i);
      gu(i) = (fp - fm) / (2 * h);
    }
  }

  /// True when offsets [begin, begin+len) are all defined.
  bool covers(Index begin, Index len) const
  {
    const auto L = length();
    return !L || begin + len <= *L;
  }

protected:
  void check_time(Index t) const
  {
    const auto L = length();
    if (t < 0 || (L && t >= *L)) {
      throw std::out_of_range(std::string(kind()) + ": stage index " + std::to_string(t) + " outside the cost sequence");
    }
  }
};

namespace detail {

template<typename Scalar>
Scalar min_eigenvalue(const MatrixX<Scalar>& S)
{
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template<typename Scalar>
Scalar max_eigenvalue(const MatrixX<Scalar>& S)
{
  if (S.size() == 0) return Scalar(0);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

}  // namespace detail

/// c_t(x, u) = x' Q_t x + u' R_t u with Q_t, R_t > 0 and sigma(x) = ||x||^2.
template<typename Scalar>
class QuadraticCost final : public CostModel<Scalar>
{
public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  QuadraticCost(std::vector<Matrix> Q_seq, std::vector<Matrix> R_seq) : Q_(std::move(Q_seq)), R_(std::move(R_seq))
  {
    detail::require(!Q_.empty(), "QuadraticCost: empty sequence");
    detail::require(Q_.size() == R_.size(), "QuadraticCost: Q and R sequences differ in length");
    const Index n = Q_.front().rows();
    const Index m = R_.front().rows();
    for (std::size_t t = 0; t < Q_.size(); ++t) {
      const std::string at = " at t=" + std::to_string(t + 1);
      detail::require(Q_[t].rows() == n && Q_[t].cols() == n, "QuadraticCost: Q has inconsistent shape" + at);
      detail::require(R_[t].rows() == m && R_[t].cols() == m, "QuadraticCost: R has inconsistent shape" + at);
      detail::require(Q_[t].allFinite() && R_[t].allFinite(), "QuadraticCost: non-finite weight" + at);
      detail::require((Q_[t] - Q_[t].transpose()).cwiseAbs().maxCoeff() <= Scalar(1e-12) * (1 + Q_[t].norm()),
                      "QuadraticCost: Q not symmetric" + at);
      detail::require((R_[t] - R_[t].transpose()).cwiseAbs().maxCoeff() <= Scalar(1e-12) * (1 + R_[t].norm()),
                      "QuadraticCost: R not symmetric" + at);
      detail::require(detail::min_eigenvalue<Scalar>(Q_[t]) > 0, "QuadraticCost: Q not positive definite" + at);
      detail::require(detail::min_eigenvalue<Scalar>(R_[t]) > 0, "QuadraticCost: R not positive definite" + at);
    }
  }

  Scalar eval(Index t, const Vector& x, const Vector& u) const override
  {
    this->check_time(t);
    return x.dot(Q(t) * x) + u.dot(R(t) * u);
  }

  Scalar sigma(const Vector& x) const override { return x.squaredNorm(); }
  std::string_view kind() const override { return "quad"; }
  std::optional<Index> length() const override { return static_cast<Index>(Q_.size()); }
  bool convex() const override { return true; }
  bool has_gradient() const override { return true; }

  void gradient(Index t, const Vector& x, const Vector& u, Vector& gx, Vector& gu) const override
  {
    this->check_time(t);
    gx = Scalar(2) * (Q(t) * x);
    gu = Scalar(2) * (R(t) * u);
  }

  const Matrix& Q(Index t) const { return Q_[static_cast<std::size_t>(t)]; }
  const Matrix& R(Index t) const { return R_[static_cast<std::size_t>(t)]; }
  const std::vector<Matrix>& Q_seq() const { return Q_; }
  const std::vector<Matrix>& R_seq() const { return R_; }

private:
  std::vector<Matrix> Q_;
  std::vector<Matrix> R_;
};

/**
 * c(x, u) = |x(1) - b|^3 + (x(2) - b)^2 + u'u, time-invariant.
 *
 * sigma drops the input term, so eval >= 1 * sigma holds by construction.
 */
template<typename Scalar>
class NonConvexCost final : public CostModel<Scalar>
{
public:
  using Vector = VectorX<Scalar>;

  explicit NonConvexCost(Scalar b) : b_(b) { detail::require(std::isfinite(b), "NonConvexCost: offset not finite"); }

  Scalar eval(Index t, const Vector& x, const Vector& u) const override
  {
    this->check_time(t);
    return sigma(x) + u.squaredNorm();
  }

  Scalar sigma(const Vector& x) const override
  {
    detail::require(x.size() >= 2, "NonConvexCost: needs a state of dimension >= 2");
    const Scalar d1 = std::abs(x(0) - b_);
    const Scalar d2 = x(1) - b_;
    return d1 * d1 * d1 + d2 * d2;
  }

  std::string_view kind() const override { return "nonconvex"; }
  bool has_gradient() const override { return true; }

  void gradient(Index t, const Vector& x, const Vector& u, Vector& gx, Vector& gu) const override
  {
    this->check_time(t);
    detail::require(x.size() >= 2, "NonConvexCost: needs a state of dimension >= 2");
    gx = Vector::Zero(x.size());
    const Scalar d1 = x(0) - b_;
    gx(0) = Scalar(3) * std::abs(d1) * d1;
    gx(1) = Scalar(2) * (x(1) - b_);
    gu = Scalar(2) * u;
  }

  Scalar offset() const { return b_; }

private:
  Scalar b_;
};

/// c_t(x, u) = a_t * dist(x, ball)^2 + u'u; sigma is the squared distance to the ball.
template<typename Scalar>
class SetDistanceCost final : public CostModel<Scalar>
{
public:
  using Vector = VectorX<Scalar>;

  SetDistanceCost(std::vector<Scalar> a_seq, Vector center, Scalar radius)
      : a_(std::move(a_seq)), center_(std::move(center)), radius_(radius)
  {
    detail::require(!a_.empty(), "SetDistanceCost: empty coefficient sequence");
    for (std::size_t t = 0; t < a_.size(); ++t) {
      detail::require(a_[t] >= 0 && a_[t] <= 1, "SetDistanceCost: a_t outside [0,1] at t=" + std::to_string(t + 1));
    }
    detail::require(radius_ > 0 && std::isfinite(radius_), "SetDistanceCost: radius must be positive");
    detail::require(center_.size() >= 1 && center_.allFinite(), "SetDistanceCost: bad center");
  }

  Scalar eval(Index t, const Vector& x, const Vector& u) const override
  {
    this->check_time(t);
    return a_[static_cast<std::size_t>(t)] * sigma(x) + u.squaredNorm();
  }

  Scalar sigma(const Vector& x) const override
  {
    const Scalar d = distance(x);
    return d * d;
  }

  std::string_view kind() const override { return "setdist"; }
  std::optional<Index> length() const override { return static_cast<Index>(a_.size()); }
  bool convex() const override { return true; }
  bool has_gradient() const override { return true; }

  void gradient(Index t, const Vector& x, const Vector& u, Vector& gx, Vector& gu) const override
  {
    this->check_time(t);
    const Vector r = x - center_;
    const Scalar rn = r.norm();
    const Scalar d = std::max(Scalar(0), rn - radius_);
    gx = d > 0 ? Vector(Scalar(2) * a_[static_cast<std::size_t>(t)] * d / rn * r) : Vector(Vector::Zero(x.size()));
    gu = Scalar(2) * u;
  }

  Scalar distance(const Vector& x) const
  {
    detail::require(x.size() == center_.size(), "SetDistanceCost: state dimension differs from the center");
    return std::max(Scalar(0), (x - center_).norm() - radius_);
  }

  const std::vector<Scalar>& coefficients() const { return a_; }
  const Vector& center() const { return center_; }
  Scalar radius() const { return radius_; }

private:
  std::vector<Scalar> a_;
  Vector center_;
  Scalar radius_;
};

/// c == 0, sigma == 0. Useful as a degenerate input.
template<typename Scalar>
class ZeroCost final : public CostModel<Scalar>
{
public:
  using Vector = VectorX<Scalar>;

  Scalar eval(Index, const Vector&, const Vector&) const override { return Scalar(0); }
  Scalar sigma(const Vector&) const override { return Scalar(0); }
  std::string_view kind() const override { return "zero"; }
  bool convex() const override { return true; }
  bool has_gradient() const override { return true; }
  void gradient(Index, const Vector& x, const Vector& u, Vector& gx, Vector& gu) const override
  {
    gx = Vector::Zero(x.size());
    gu = Vector::Zero(u.size());
  }
};

/**
 * @brief Constants alpha_lo, alpha_hi, gamma_bar^2, beta = alpha_lo/alpha_hi, zeta.
 *
 * Construction enforces 0 < beta <= 1, zeta > 1 and beta >= 1/zeta.
 * `certified` records whether alpha_hi and gamma_bar^2 came from the exact
 * quadratic path rather than sampling.
 */
template<typename Scalar>
struct AssumptionParams
{
  Scalar alpha_lo{};
  Scalar alpha_hi{};
  Scalar gamma_bar_sq{};
  Scalar beta{};
  Scalar zeta{};
  bool certified = false;

  static AssumptionParams make(Scalar alpha_lo, Scalar alpha_hi, Scalar gamma_bar_sq, Scalar zeta, bool certified)
  {
    detail::require(alpha_lo > 0 && std::isfinite(alpha_lo), "AssumptionParams: alpha_lo must be positive");
    detail::require(alpha_hi > 0 && std::isfinite(alpha_hi), "AssumptionParams: alpha_hi must be positive");
    detail::require(gamma_bar_sq > 0 && std::isfinite(gamma_bar_sq), "AssumptionParams: gamma_bar^2 must be positive");
    const Scalar beta = alpha_lo / alpha_hi;
    detail::require(beta <= Scalar(1) + Scalar(1e-12), "AssumptionParams: beta = alpha_lo/alpha_hi exceeds 1");
    detail::require(zeta > 1, "AssumptionParams: zeta must exceed 1");
    detail::require(beta * zeta >= Scalar(1) - Scalar(1e-12), "AssumptionParams: zeta < 1/beta");
    return AssumptionParams{alpha_lo, alpha_hi, gamma_bar_sq, std::min(beta, Scalar(1)), zeta, certified};
  }

  /// zeta = max(1/beta, 1 + 1e-9): the tightest admissible choice.
  static AssumptionParams make(Scalar alpha_lo, Scalar alpha_hi, Scalar gamma_bar_sq, bool certified)
  {
    detail::require(alpha_lo > 0 && alpha_hi > 0, "AssumptionParams: alpha bounds must be positive");
    const Scalar zeta = std::max(alpha_hi / alpha_lo, Scalar(1) + Scalar(1e-9));
    return make(alpha_lo, alpha_hi, gamma_bar_sq, zeta, certified);
  }
};

/// Sum of c_t(x_t, u_t) along the trajectory; also fills traj.stage_costs.
/// `offset` is the cost index of the trajectory's first step.
template<typename Scalar>
Scalar total_cost(Trajectory<Scalar>& traj, const CostModel<Scalar>& costs, Index offset = 0)
{
  const Index T = traj.horizon();
  detail::require(static_cast<Index>(traj.states.size()) >= T, "total_cost: trajectory has too few states");
  if (!costs.covers(offset, T)) {
    throw std::invalid_argument("total_cost: trajectory length " + std::to_string(T) + " exceeds the cost sequence");
  }
  traj.stage_costs.assign(static_cast<std::size_t>(T), Scalar(0));
  Scalar J(0);
  for (Index t = 0; t < T; ++t) {
    const auto k = static_cast<std::size_t>(t);
    const Scalar c = costs.eval(offset + t, traj.states[k], traj.inputs[k]);
    if (!(c >= 0)) {
      throw std::logic_error(std::string(costs.kind()) + ": negative or non-finite stage cost at t=" +
                             std::to_string(offset + t + 1));
    }
    traj.stage_costs[k] = c;
    J += c;
  }
  return J;
}

template<typename Scalar>
Scalar sigma_eval(const CostModel<Scalar>& costs, const VectorX<Scalar>& x)
{
  return costs.sigma(x);
}

template<typename Scalar>
struct AlphaLowerEstimate
{
  Scalar value{};
  bool certified = false;
  std::size_t samples = 0;
};

/// Grid used when alpha_lo has no closed form: per_axis points on [lo, hi]^n, u = 0.
template<typename Scalar>
struct SampleGrid
{
  Index n = 2;
  Index m = 1;
  Index per_axis = 41;
  Scalar lo = Scalar(-2);
  Scalar hi = Scalar(2);
};

/**
 * alpha_lo with provenance. Exact for QuadraticCost (min_t lambda_min(Q_t))
 * and SetDistanceCost (min_t a_t); otherwise the infimum of eval(t,x,0)/sigma(x)
 * over the grid, flagged as not certified.
 */
template<typename Scalar>
AlphaLowerEstimate<Scalar> estimate_alpha_lower(const CostModel<Scalar>& costs, const SampleGrid<Scalar>& grid = {})
{
  if (const auto* q = dynamic_cast<const QuadraticCost<Scalar>*>(&costs)) {
    Scalar lo = std::numeric_limits<Scalar>::infinity();
    for (const auto& Q : q->Q_seq()) lo = std::min(lo, detail::min_eigenvalue<Scalar>(Q));
    return {lo, true, q->Q_seq().size()};
  }
  if (const auto* s = dynamic_cast<const SetDistanceCost<Scalar>*>(&costs)) {
    const auto& a = s->coefficients();
    const Scalar lo = *std::min_element(a.begin(), a.end());
    detail::require(lo > 0, "estimate_alpha_lower: some a_t = 0, beta undefined");
    return {lo, true, a.size()};
  }

  detail::require(grid.n >= 1 && grid.per_axis >= 2 && grid.hi > grid.lo, "estimate_alpha_lower: bad sample grid");
  const Index steps = costs.length() ? *costs.length() : 1;
  Index total = 1;
  for (Index i = 0; i < grid.n; ++i) total *= grid.per_axis;
  const Scalar h = (grid.hi - grid.lo) / Scalar(grid.per_axis - 1);

  Scalar best = std::numeric_limits<Scalar>::infinity();
  std::size_t used = 0;
  VectorX<Scalar> x(grid.n);
  const VectorX<Scalar> u0 = VectorX<Scalar>::Zero(grid.m);
  for (Index t = 0; t < steps; ++t) {
    for (Index k = 0; k < total; ++k) {
      Index rem = k;
      for (Index i = 0; i < grid.n; ++i) {
        x(i) = grid.lo + h * Scalar(rem % grid.per_axis);
        rem /= grid.per_axis;
      }
      const Scalar s = costs.sigma(x);
      if (!(s > 0)) continue;
      best = std::min(best, costs.eval(t, x, u0) / s);
      ++used;
    }
  }
  if (used == 0) throw std::domain_error("estimate_alpha_lower: sigma vanishes on every sample, beta undefined");
  return {best, false, used};
}

}  // namespace prhc
