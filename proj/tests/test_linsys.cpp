#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

#include <random>

using namespace prhc;
using namespace prhc::test;

TEST_CASE("step: hand-computed transitions")
{
  CHECK(step(LinearSystem<double>(scalar(0.5), scalar(1)), v({0}), v({1}), v({0.2}))(0) == doctest::Approx(1.2));

  const LinearSystem<double> identity(Mat::Identity(2, 2), Mat::Zero(2, 1));
  CHECK(step(identity, v({1, 2}), v({5}), v({0, 0})).isApprox(v({1, 2})));

  Mat A(2, 2);
  A << 0, 1, 0, 0;
  Mat B(2, 1);
  B << 0, 1;
  const Vec x = step(LinearSystem<double>(A, B), v({1, 0}), v({3}), v({0.1, -0.1}));
  CHECK(x(0) == doctest::Approx(0.1));
  CHECK(x(1) == doctest::Approx(2.9));
}

TEST_CASE("step: dimension errors name the argument")
{
  const LinearSystem<double> sys(Mat::Identity(2, 2), Mat::Ones(2, 1));
  const auto message = [&](const Vec& x, const Vec& u, const Vec& w) {
    try {
      step(sys, x, u, w);
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message(v({1}), v({1}), v({0, 0})).find("x") != std::string::npos);
  CHECK(message(v({1, 1}), v({1, 1}), v({0, 0})).find("u") != std::string::npos);
  CHECK(message(v({1, 1}), v({1}), v({0})).find("w") != std::string::npos);
}

TEST_CASE("LinearSystem rejects malformed matrices")
{
  CHECK_THROWS_AS(LinearSystem<double>(Mat::Zero(2, 3), Mat::Zero(2, 1)), std::invalid_argument);
  CHECK_THROWS_AS(LinearSystem<double>(Mat::Zero(2, 2), Mat::Zero(3, 1)), std::invalid_argument);
  CHECK_THROWS_AS(LinearSystem<double>(Mat::Zero(2, 2), Mat::Zero(2, 0)), std::invalid_argument);
  Mat bad = Mat::Zero(1, 1);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(LinearSystem<double>(bad, scalar(1)), std::invalid_argument);
}

TEST_CASE("DisturbanceSequence enforces the norm cap")
{
  CHECK_NOTHROW(DisturbanceSequence<double>({v({0.6, 0.8})}, 1.0));
  CHECK_NOTHROW(DisturbanceSequence<double>({v({0.6, 0.8 + 1e-13})}, 1.0));
  CHECK_THROWS_AS(DisturbanceSequence<double>({v({0.6, 0.81})}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(DisturbanceSequence<double>({v({std::numeric_limits<double>::infinity()})}, 1e300),
                  std::invalid_argument);

  const DisturbanceSequence<double> w({v({1}), v({2}), v({3})}, 5.0);
  CHECK(w.energy() == doctest::Approx(14));
  CHECK(w.energy(1, 3) == doctest::Approx(13));
  CHECK(w.slice(1, 2)[0](0) == 2);
  CHECK_THROWS_AS(w.slice(2, 2), std::invalid_argument);
}

TEST_CASE("rollout: hand-computed trajectories")
{
  const LinearSystem<double> sys(scalar(0.5), scalar(1));
  const auto tr = rollout<double>(sys, v({0}), {v({1}), v({0})}, DisturbanceSequence<double>({v({0.2}), v({0})}, 1.0));
  REQUIRE(tr.states.size() == 3);
  CHECK(tr.states[0](0) == 0);
  CHECK(tr.states[1](0) == doctest::Approx(1.2));
  CHECK(tr.states[2](0) == doctest::Approx(0.6));

  const auto decay = rollout<double>(sys, v({1}), {v({0}), v({0}), v({0})},
                             DisturbanceSequence<double>({v({0}), v({0}), v({0})}, 1.0));
  CHECK(decay.states[1](0) == 0.5);
  CHECK(decay.states[2](0) == 0.25);
  CHECK(decay.states[3](0) == 0.125);
  CHECK(decay.horizon() == 3);
}

TEST_CASE("rollout: zero input and disturbance keep the origin")
{
  std::mt19937_64 rng(3);
  const LinearSystem<double> sys(random_matrix(rng, 3, 3), random_matrix(rng, 3, 2));
  std::vector<Vec> u(5, Vec::Zero(2)), w(5, Vec::Zero(3));
  const auto tr = rollout<double>(sys, Vec(Vec::Zero(3)), u, DisturbanceSequence<double>(w, 1.0));
  for (const auto& x : tr.states) CHECK(x.isZero(0));
}

TEST_CASE("rollout: length and dimension mismatches")
{
  const LinearSystem<double> sys(scalar(1), scalar(1));
  CHECK_THROWS_AS(rollout<double>(sys, v({0}), {v({1})}, DisturbanceSequence<double>({v({0}), v({0})}, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(rollout<double>(sys, v({0, 0}), {v({1})}, DisturbanceSequence<double>({v({0})}, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("stack_dynamics: small cases")
{
  const LinearSystem<double> sys(scalar(0.5), scalar(1));
  const auto one = stack_dynamics(sys, 1);
  CHECK(one.F.isApprox(Mat::Identity(1, 1)));
  CHECK(one.G.isZero(0));
  CHECK(one.H.isZero(0));

  const auto two = stack_dynamics(sys, 2);
  Mat F(2, 1), G(2, 2);
  F << 1, 0.5;
  G << 0, 0, 1, 0;
  CHECK(two.F.isApprox(F));
  CHECK(two.G.isApprox(G));
  CHECK(two.H.isApprox(G));
  CHECK_THROWS_AS(stack_dynamics(sys, 0), std::invalid_argument);
  CHECK_THROWS_AS(stack_dynamics(sys, 2, v({1, 2})), std::invalid_argument);
}

TEST_CASE("stack_dynamics matches rollout on random systems")
{
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<Index> dim(1, 4), hor(1, 8), inp(1, 3);
  std::uniform_real_distribution<double> unit(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = dim(rng), m = inp(rng), N = hor(rng);
    const LinearSystem<double> sys(random_matrix(rng, n, n, 1.2), random_matrix(rng, n, m));
    const Vec x = random_matrix(rng, n, 1);
    std::vector<Vec> u, w;
    for (Index k = 0; k < N; ++k) {
      u.push_back(random_matrix(rng, m, 1));
      w.push_back(random_matrix(rng, n, 1));
    }
    const auto sd = stack_dynamics(sys, N, x);
    const Vec pred = sd.F * x + sd.G * stack(u) + sd.H * stack(w);
    const auto tr = rollout<double>(sys, x, u, DisturbanceSequence<double>(w, 10.0));
    for (Index k = 0; k < N; ++k) {
      const Vec& ref = tr.states[static_cast<std::size_t>(k)];
      CHECK((pred.segment(k * n, n) - ref).norm() <= 1e-10 * std::max(1.0, ref.norm()));
    }
  }
}

TEST_CASE("rollout is bitwise deterministic and validates")
{
  std::mt19937_64 rng(5);
  const LinearSystem<double> sys(random_matrix(rng, 2, 2), random_matrix(rng, 2, 1));
  std::vector<Vec> u, w;
  for (int k = 0; k < 10; ++k) {
    u.push_back(random_matrix(rng, 1, 1));
    w.push_back(random_matrix(rng, 2, 1, 0.5));
  }
  const DisturbanceSequence<double> ws(w, 1.0);
  const auto a = rollout<double>(sys, v({1, -1}), u, ws);
  const auto b = rollout<double>(sys, v({1, -1}), u, ws);
  for (std::size_t k = 0; k < a.states.size(); ++k) CHECK((a.states[k].array() == b.states[k].array()).all());
  CHECK(validate_trajectory(sys, a) <= 1e-14);

  auto broken = a;
  broken.states[4](0) += 1e-3;
  CHECK(validate_trajectory(sys, broken) > 1e-4);
  broken.inputs.pop_back();
  CHECK_THROWS_AS(validate_trajectory(sys, broken), std::invalid_argument);
}

TEST_CASE("stack and unstack are inverse")
{
  const std::vector<Vec> parts{v({1, 2}), v({3, 4}), v({5, 6})};
  const Vec s = stack(parts);
  CHECK(s.size() == 6);
  const auto back = unstack(s, 2);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back[i] == parts[i]);
  CHECK_THROWS_AS(unstack(s, 4), std::invalid_argument);
}
