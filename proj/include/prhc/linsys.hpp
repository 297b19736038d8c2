#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace prhc {

template<typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template<typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

namespace detail {

inline void require(bool ok, const std::string& what)
{
  if (!ok) throw std::invalid_argument(what);
}

template<typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m)
{
  return m.allFinite();
}

}  // namespace detail

/**
 * @brief Discrete-time LTI dynamics x_{t+1} = A x_t + B u_t + w_t.
 *
 * Immutable after construction. The disturbance enters additively and
 * un-scaled, so it lives in state space.
 */
template<typename Scalar>
class LinearSystem
{
public:
  using Matrix = MatrixX<Scalar>;
  using Vector = VectorX<Scalar>;

  LinearSystem(Matrix A, Matrix B) : A_(std::move(A)), B_(std::move(B))
  {
    detail::require(A_.rows() >= 1 && A_.rows() == A_.cols(), "LinearSystem: A must be square with n >= 1");
    detail::require(B_.cols() >= 1, "LinearSystem: B must have m >= 1 columns");
    detail::require(B_.rows() == A_.rows(), "LinearSystem: B must have n rows");
    detail::require(detail::all_finite(A_) && detail::all_finite(B_), "LinearSystem: non-finite entry");
  }

  const Matrix& A() const { return A_; }
  const Matrix& B() const { return B_; }
  Index n() const { return A_.rows(); }
  Index m() const { return B_.cols(); }

private:
  Matrix A_;
  Matrix B_;
};

/// Ordered disturbances w_1..w_T with the norm cap w_c standing in for the set W.
template<typename Scalar>
struct DisturbanceSequence
{
  using Vector = VectorX<Scalar>;

  std::vector<Vector> w;
  Scalar cap = std::numeric_limits<Scalar>::infinity();

  DisturbanceSequence() = default;
  DisturbanceSequence(std::vector<Vector> seq, Scalar norm_cap) : w(std::move(seq)), cap(norm_cap) { validate(); }

  Index size() const { return static_cast<Index>(w.size()); }
  const Vector& operator[](Index t) const { return w[static_cast<std::size_t>(t)]; }

  /// Cap check uses a 1e-12 absolute allowance.
  void validate() const
  {
    detail::require(!(cap < Scalar(0)), "DisturbanceSequence: negative norm cap");
    for (std::size_t t = 0; t < w.size(); ++t) {
      detail::require(detail::all_finite(w[t]), "DisturbanceSequence: non-finite entry at t=" + std::to_string(t + 1));
      detail::require(w[t].norm() <= cap + Scalar(1e-12),
                      "DisturbanceSequence: ||w_" + std::to_string(t + 1) + "|| exceeds cap");
    }
  }

  /// Contiguous window [begin, begin+len), same cap.
  DisturbanceSequence slice(Index begin, Index len) const
  {
    detail::require(begin >= 0 && len >= 0 && begin + len <= size(), "DisturbanceSequence: slice out of range");
    DisturbanceSequence out;
    out.cap = cap;
    out.w.assign(w.begin() + begin, w.begin() + begin + len);
    return out;
  }

  Scalar energy(Index begin, Index end) const
  {
    Scalar e(0);
    for (Index t = begin; t < end && t < size(); ++t) e += (*this)[t].squaredNorm();
    return e;
  }
  Scalar energy() const { return energy(0, size()); }
};

template<typename Scalar>
struct Trajectory
{
  using Vector = VectorX<Scalar>;

  std::vector<Vector> states;        // x_1 .. x_{T+1}
  std::vector<Vector> inputs;        // u_1 .. u_T
  std::vector<Vector> disturbances;  // w_1 .. w_T
  std::vector<Scalar> stage_costs;   // c_1 .. c_T, filled by total_cost

  Index horizon() const { return static_cast<Index>(inputs.size()); }
};

/// Batch form over offsets 0..N-1: x_stack = F x_t + G u_stack + H w_stack.
template<typename Scalar>
struct StackedDynamics
{
  MatrixX<Scalar> F;
  MatrixX<Scalar> G;
  MatrixX<Scalar> H;
  Index horizon = 0;
};

template<typename Scalar>
VectorX<Scalar> step(const LinearSystem<Scalar>& sys, const VectorX<Scalar>& x, const VectorX<Scalar>& u,
                     const VectorX<Scalar>& w)
{
  detail::require(x.size() == sys.n(), "step: state x has dimension " + std::to_string(x.size()) + ", expected " +
                                           std::to_string(sys.n()));
  detail::require(u.size() == sys.m(), "step: input u has dimension " + std::to_string(u.size()) + ", expected " +
                                           std::to_string(sys.m()));
  detail::require(w.size() == sys.n(), "step: disturbance w has dimension " + std::to_string(w.size()) +
                                           ", expected " + std::to_string(sys.n()));
  return sys.A() * x + sys.B() * u + w;
}

template<typename Scalar>
Trajectory<Scalar> rollout(const LinearSystem<Scalar>& sys, const VectorX<Scalar>& x1,
                           const std::vector<VectorX<Scalar>>& u_seq, const DisturbanceSequence<Scalar>& w_seq)
{
  detail::require(static_cast<Index>(u_seq.size()) == w_seq.size(),
                  "rollout: " + std::to_string(u_seq.size()) + " inputs vs " + std::to_string(w_seq.size()) +
                      " disturbances");
  detail::require(x1.size() == sys.n(), "rollout: initial state has wrong dimension");
  Trajectory<Scalar> traj;
  traj.states.reserve(u_seq.size() + 1);
  traj.states.push_back(x1);
  for (std::size_t t = 0; t < u_seq.size(); ++t) {
    traj.states.push_back(step(sys, traj.states.back(), u_seq[t], w_seq.w[t]));
  }
  traj.inputs = u_seq;
  traj.disturbances = w_seq.w;
  return traj;
}

template<typename Scalar>
StackedDynamics<Scalar> stack_dynamics(const LinearSystem<Scalar>& sys, Index N)
{
  detail::require(N >= 1, "stack_dynamics: horizon N must be >= 1");
  const Index n = sys.n();
  const Index m = sys.m();
  StackedDynamics<Scalar> s;
  s.horizon = N;
  s.F = MatrixX<Scalar>::Zero(n * N, n);
  s.G = MatrixX<Scalar>::Zero(n * N, m * N);
  s.H = MatrixX<Scalar>::Zero(n * N, n * N);

  // Block (k, j), j < k, of H is A^{k-1-j}; G is that times B.
  std::vector<MatrixX<Scalar>> powers;
  powers.reserve(static_cast<std::size_t>(N));
  powers.push_back(MatrixX<Scalar>::Identity(n, n));
  for (Index k = 1; k < N; ++k) powers.push_back(sys.A() * powers.back());

  for (Index k = 0; k < N; ++k) {
    s.F.block(k * n, 0, n, n) = powers[static_cast<std::size_t>(k)];
    for (Index j = 0; j < k; ++j) {
      const auto& P = powers[static_cast<std::size_t>(k - 1 - j)];
      s.H.block(k * n, j * n, n, n) = P;
      s.G.block(k * n, j * m, n, m) = P * sys.B();
    }
  }
  return s;
}

/// F, G, H do not depend on x_t; it is only dimension-checked.
template<typename Scalar>
StackedDynamics<Scalar> stack_dynamics(const LinearSystem<Scalar>& sys, Index N, const VectorX<Scalar>& x_t)
{
  detail::require(x_t.size() == sys.n(), "stack_dynamics: x_t has wrong dimension");
  return stack_dynamics(sys, N);
}

template<typename Scalar>
VectorX<Scalar> stack(const std::vector<VectorX<Scalar>>& parts)
{
  Index total = 0;
  for (const auto& p : parts) total += p.size();
  VectorX<Scalar> out(total);
  Index off = 0;
  for (const auto& p : parts) {
    out.segment(off, p.size()) = p;
    off += p.size();
  }
  return out;
}

template<typename Scalar>
std::vector<VectorX<Scalar>> unstack(const VectorX<Scalar>& v, Index block)
{
  detail::require(block >= 1 && v.size() % block == 0, "unstack: size is not a multiple of the block");
  std::vector<VectorX<Scalar>> out;
  out.reserve(static_cast<std::size_t>(v.size() / block));
  for (Index k = 0; k < v.size(); k += block) out.emplace_back(v.segment(k, block));
  return out;
}

/**
 * Post-hoc check of the dynamics invariant. Returns the largest per-step
 * residual ||x_{t+1} - (A x_t + B u_t + w_t)|| scaled by (1 + ||x_{t+1}||);
 * throws on inconsistent lengths.
 */
template<typename Scalar>
Scalar validate_trajectory(const LinearSystem<Scalar>& sys, const Trajectory<Scalar>& traj)
{
  detail::require(traj.states.size() == traj.inputs.size() + 1, "validate_trajectory: |states| != |inputs| + 1");
  detail::require(traj.disturbances.size() == traj.inputs.size(), "validate_trajectory: |disturbances| != |inputs|");
  Scalar worst(0);
  for (std::size_t t = 0; t < traj.inputs.size(); ++t) {
    const VectorX<Scalar> pred = step(sys, traj.states[t], traj.inputs[t], traj.disturbances[t]);
    const Scalar r = (traj.states[t + 1] - pred).norm() / (Scalar(1) + traj.states[t + 1].norm());
    worst = std::max(worst, r);
  }
  return worst;
}

}  // namespace prhc
