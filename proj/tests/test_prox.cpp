#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fusedl0/prox.hpp"
#include "fusedl0/rng.hpp"
#include "oracles.hpp"

using fusedl0::ProxParams;
using fusedl0::ProxResult;
using fusedl0::SplitMix64;
using fusedl0::Vector;

namespace {

ProxParams box_params(Eigen::Index n, double l1, double l2, double lo = -1.0,
                      double hi = 1.0) {
  ProxParams p;
  p.lambda1 = l1;
  p.lambda2 = l2;
  p.l = Vector::Constant(n, lo);
  p.u = Vector::Constant(n, hi);
  return p;
}

ProxParams random_params(SplitMix64& rng, Eigen::Index n) {
  ProxParams p;
  p.lambda1 = rng.uniform(0.01, 2.0);
  p.lambda2 = rng.uniform(0.01, 2.0);
  p.l.resize(n);
  p.u.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    p.l[i] = -rng.uniform(0.0, 2.0);
    p.u[i] = rng.uniform(0.0, 2.0);
  }
  return p;
}

}  // namespace

TEST_CASE("prox at z = 0 returns 0") {
  for (Eigen::Index n : {1, 3, 7}) {
    const auto res =
        fusedl0::prox_fused_l0(Vector::Zero(n), box_params(n, 0.5, 0.5));
    CHECK(res.x.isZero(0.0));
    CHECK(res.objective == doctest::Approx(0.0));
  }
}

TEST_CASE("single nonzero block beats sparsification at small penalties") {
  Vector z = Vector::Constant(3, 1.0);
  const auto p = box_params(3, 0.1, 0.1);
  const auto res = fusedl0::prox_fused_l0(z, p);
  CHECK(res.x[0] == doctest::Approx(1.0));
  CHECK(res.x[1] == doctest::Approx(1.0));
  CHECK(res.x[2] == doctest::Approx(1.0));
  CHECK(res.objective == doctest::Approx(0.3));
  const auto bf = fusedl0::brute_force_prox(z, p);
  CHECK(bf.objective == doctest::Approx(res.objective));
}

TEST_CASE("large penalties zero small inputs") {
  Vector z(2);
  z << 0.1, 0.1;
  const auto p = box_params(2, 1.0, 1.0);
  const auto res = fusedl0::prox_fused_l0(z, p);
  CHECK(res.x.isZero(0.0));
  CHECK(res.objective == doctest::Approx(0.01));
}

TEST_CASE("n = 1 with lambda2 = 0 is a scalar clamp") {
  for (double t : {-3.0, -0.4, 0.0, 0.7, 2.5}) {
    Vector z(1);
    z << t;
    const auto p = box_params(1, 0.3, 0.0);
    const auto res = fusedl0::prox_fused_l0(z, p);
    CHECK(res.x[0] == doctest::Approx(std::clamp(t, -1.0, 1.0)));
  }
}

TEST_CASE("blocks tile the index range with distinct adjacent values") {
  SplitMix64 rng(11);
  Vector z(40);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const auto res =
      fusedl0::prox_fused_l0(z, box_params(40, 0.4, 0.2, -2.0, 2.0));
  Eigen::Index pos = 0;
  for (std::size_t j = 0; j < res.blocks.size(); ++j) {
    const auto& b = res.blocks[j];
    CHECK(b.start == pos);
    for (Eigen::Index i = b.start; i < b.end; ++i) CHECK(res.x[i] == b.value);
    if (j > 0) CHECK(res.blocks[j - 1].value != b.value);
    pos = b.end;
  }
  CHECK(pos == 40);
}

TEST_CASE("prox_scaled: mu = 1 identity and argmin scaling invariance") {
  SplitMix64 rng(3);
  Vector z(12);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.uniform(-2.0, 2.0);
  const auto p = box_params(12, 0.7, 0.3);

  const auto a = fusedl0::prox_fused_l0(z, p);
  const auto b = fusedl0::prox_scaled(z, 1.0, p);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.objective == doctest::Approx(b.objective));

  // argmin under mu equals argmin with penalties divided by mu
  const double mu = 3.7;
  const auto c = fusedl0::prox_scaled(z, mu, p);
  ProxParams q = p;
  q.lambda1 /= mu;
  q.lambda2 /= mu;
  const auto d = fusedl0::prox_fused_l0(z, q);
  CHECK((c.x - d.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(c.objective == doctest::Approx(mu * d.objective));

  CHECK_THROWS_AS(fusedl0::prox_scaled(z, 0.0, p), std::invalid_argument);
}

TEST_CASE("large mu approaches the plain projection") {
  SplitMix64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform() * 8);
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.uniform(-2.0, 2.0);
    auto p = random_params(rng, n);

    const auto big = fusedl0::prox_scaled(z, 1e8, p);
    const Vector proj = z.cwiseMax(p.l).cwiseMin(p.u);
    CHECK((big.x - proj).cwiseAbs().maxCoeff() <= 1e-6);

    // objective agreement with the oracle at both scales
    for (double mu : {1.0, 10.0}) {
      ProxParams q = p;
      q.lambda1 /= mu;
      q.lambda2 /= mu;
      const auto got = fusedl0::prox_scaled(z, mu, p);
      const auto want = fusedl0::brute_force_prox(z, q);
      CHECK(std::abs(got.objective - mu * want.objective) <= 1e-9 * mu);
    }
  }
}

TEST_CASE("oracle equivalence on random small instances") {
  SplitMix64 rng(2024);
  for (int t = 0; t < 300; ++t) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.uniform() * 8);
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.uniform(-2.0, 2.0);
    const auto p = random_params(rng, n);

    const auto fast = fusedl0::prox_fused_l0(z, p);
    const auto slow = fusedl0::brute_force_prox(z, p);
    CHECK(std::abs(fast.objective - slow.objective) <= 1e-9);
    // the minimizer itself must be feasible and consistent with its objective
    CHECK(std::abs(fusedl0::prox_objective(fast.x, z, p) - fast.objective) <=
          1e-10 * (1.0 + std::abs(fast.objective)));
  }
}

TEST_CASE("exchange optimality of prox outputs") {
  SplitMix64 rng(77);
  for (int t = 0; t < 25; ++t) {
    const Eigen::Index n = 50 + static_cast<Eigen::Index>(rng.uniform() * 100);
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
    auto p = random_params(rng, n);
    p.lambda1 = rng.uniform(0.05, 0.8);
    p.lambda2 = rng.uniform(0.0, 0.4);
    const auto res = fusedl0::prox_fused_l0(z, p);
    CHECK(oracles::worst_exchange_decrease(res, z, p) >= -1e-10);
  }
}

TEST_CASE("stage values move monotonically with the penalties") {
  SplitMix64 rng(13);
  Vector z(60);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  auto hi = box_params(60, 0.8, 0.5, -3.0, 3.0);
  auto lo = hi;
  lo.lambda1 = 0.3;
  lo.lambda2 = 0.1;
  const auto rh = fusedl0::prox_fused_l0(z, hi);
  const auto rl = fusedl0::prox_fused_l0(z, lo);
  for (std::size_t s = 0; s < rh.stage_values.size(); ++s)
    CHECK(rl.stage_values[s] <= rh.stage_values[s] + 1e-12);
}

TEST_CASE("determinism: identical inputs give bit-identical outputs") {
  SplitMix64 rng(99);
  Vector z(50);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  const auto p = box_params(50, 0.3, 0.2, -2.0, 2.0);
  const auto a = fusedl0::prox_fused_l0(z, p);
  const auto b = fusedl0::prox_fused_l0(z, p);
  REQUIRE(a.x.size() == b.x.size());
  for (Eigen::Index i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == b.x[i]);
  CHECK(a.objective == b.objective);
}

TEST_CASE("parameter validation") {
  Vector z(3);
  z << 1, 2, 3;
  ProxParams p = box_params(3, 0.1, 0.1);
  p.l[1] = 0.5;  // violates l <= 0
  CHECK_THROWS_AS(fusedl0::prox_fused_l0(z, p), std::invalid_argument);

  ProxParams q = box_params(3, -0.1, 0.1);
  CHECK_THROWS_AS(fusedl0::prox_fused_l0(z, q), std::invalid_argument);

  CHECK_THROWS_AS(
      fusedl0::brute_force_prox(Vector::Zero(13), box_params(13, 1, 1)),
      std::invalid_argument);
}
