#pragma once

#include "prhc/costs.hpp"
#include "prhc/linsys.hpp"

#include <initializer_list>
#include <memory>
#include <random>

namespace prhc::test {

using Mat = MatrixX<double>;
using Vec = VectorX<double>;

inline Vec v(std::initializer_list<double> xs)
{
  Vec out(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) out(i++) = x;
  return out;
}

inline Mat scalar(double a) { return Mat::Constant(1, 1, a); }

inline Mat random_matrix(std::mt19937_64& rng, Index r, Index c, double scale = 1.0)
{
  std::uniform_real_distribution<double> d(-scale, scale);
  Mat M(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) M(i, j) = d(rng);
  return M;
}

/// S S' + floor * I: symmetric positive definite.
inline Mat random_spd(std::mt19937_64& rng, Index n, double floor = 0.1)
{
  const Mat S = random_matrix(rng, n, n);
  return S * S.transpose() + floor * Mat::Identity(n, n);
}

inline std::shared_ptr<QuadraticCost<double>> random_quadratic(std::mt19937_64& rng, Index n, Index m, Index T)
{
  std::vector<Mat> Q, R;
  for (Index t = 0; t < T; ++t) {
    Q.push_back(random_spd(rng, n));
    R.push_back(random_spd(rng, m));
  }
  return std::make_shared<QuadraticCost<double>>(std::move(Q), std::move(R));
}

inline std::shared_ptr<QuadraticCost<double>> constant_quadratic(const Mat& Q, const Mat& R, Index T)
{
  return std::make_shared<QuadraticCost<double>>(std::vector<Mat>(static_cast<std::size_t>(T), Q),
                                                 std::vector<Mat>(static_cast<std::size_t>(T), R));
}

inline DisturbanceSequence<double> random_disturbances(std::mt19937_64& rng, Index n, Index T, double scale = 1.0)
{
  std::vector<Vec> w;
  for (Index t = 0; t < T; ++t) w.push_back(random_matrix(rng, n, 1, scale));
  return DisturbanceSequence<double>(std::move(w), scale * std::sqrt(double(n)));
}

inline DisturbanceSequence<double> zeros(Index n, Index T)
{
  return DisturbanceSequence<double>(std::vector<Vec>(static_cast<std::size_t>(T), Vec::Zero(n)), 1.0);
}

}  // namespace prhc::test
