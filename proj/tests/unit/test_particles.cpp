#include "vlpic/diagnostics.hpp"
#include "vlpic/errors.hpp"
#include "vlpic/particles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

using namespace vlpic;

namespace {

const double kLength = 2.0 * std::numbers::pi * std::sqrt(2.0);
const double kTemp = 3.0 / 511.0;

double mean(const std::vector<double>& v, std::size_t stride = 1, std::size_t offset = 0) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = offset; i < v.size(); i += stride, ++n) s += v[i];
  return s / static_cast<double>(n);
}

double variance(const std::vector<double>& v, std::size_t stride = 1, std::size_t offset = 0) {
  const double m = mean(v, stride, offset);
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = offset; i < v.size(); i += stride, ++n) s += (v[i] - m) * (v[i] - m);
  return s / static_cast<double>(n - 1);
}

} // namespace

TEST_CASE("1D sampling is deterministic for a fixed seed") {
  const ParticleEnsemble a = sample_maxwellian_1d(1000, kTemp, kLength, 42);
  const ParticleEnsemble b = sample_maxwellian_1d(1000, kTemp, kLength, 42);
  CHECK(a.X == b.X);
  CHECK(a.P == b.P);
  CHECK(a.W == b.W);
  const ParticleEnsemble c = sample_maxwellian_1d(1000, kTemp, kLength, 43);
  CHECK(a.P != c.P);
}

TEST_CASE("1D momentum moments lie within the standard-error band") {
  const std::size_t np = 1000;
  const ParticleEnsemble e = sample_maxwellian_1d(np, kTemp, kLength, 42);
  const double n = static_cast<double>(np);
  CHECK(std::abs(mean(e.P)) <= 5.0 * std::sqrt(kTemp / n));
  CHECK(std::abs(variance(e.P) - kTemp) <= 5.0 * kTemp * std::sqrt(2.0 / n));
}

TEST_CASE("1D weights are uniform and sum to the domain length") {
  const std::size_t np = 1000;
  const ParticleEnsemble e = sample_maxwellian_1d(np, kTemp, kLength, 42);
  for (double w : e.W) CHECK(w == kLength / static_cast<double>(np));
  CHECK(std::abs(std::accumulate(e.W.begin(), e.W.end(), 0.0) - kLength) <= 1e-12 * kLength);
  for (std::size_t a = 0; a < np; ++a) {
    CHECK(e.X[a] >= 0.0);
    CHECK(e.X[a] < kLength);
  }
}

TEST_CASE("stratified start puts one particle in each slot") {
  const std::size_t np = 64;
  const ParticleEnsemble e = sample_maxwellian_1d(np, kTemp, 1.0, 9);
  for (std::size_t a = 0; a < np; ++a)
    CHECK(static_cast<std::size_t>(std::floor(e.X[a] * static_cast<double>(np))) == a);
}

TEST_CASE("spin initialisation sets moments") {
  ParticleEnsemble e = sample_maxwellian_1d(500, kTemp, kLength, 1);
  init_spin_delta(e, {0.0, 0.0, 1.0});
  Vec3 s = spin_moments(e);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == 0.0);
  CHECK(std::abs(s[2] - kLength) <= 1e-12 * kLength);
  init_spin_delta(e, {0.0, 1.0, 0.0});
  s = spin_moments(e);
  CHECK(std::abs(s[1] - kLength) <= 1e-12 * kLength);
  CHECK(s[2] == 0.0);
  CHECK_THROWS_AS(init_spin_delta(e, {0.0, 0.5, 0.5}), ConfigError);
}

TEST_CASE("2D sampling: weights, variance band and determinism") {
  const std::size_t np = 2000;
  const double l1 = 3.0, l2 = 2.0;
  const ParticleEnsemble e = sample_maxwellian_2d(np, kTemp, l1, l2, 5);
  const ParticleEnsemble f = sample_maxwellian_2d(np, kTemp, l1, l2, 5);
  CHECK(e.dim == 2);
  CHECK(e.X == f.X);
  CHECK(e.P == f.P);
  CHECK(std::abs(std::accumulate(e.W.begin(), e.W.end(), 0.0) - l1 * l2) <= 1e-12 * l1 * l2);
  const double n = static_cast<double>(np);
  for (std::size_t axis = 0; axis < 2; ++axis)
    CHECK(std::abs(variance(e.P, 2, axis) - kTemp) <= 5.0 * kTemp * std::sqrt(2.0 / n));
  for (std::size_t a = 0; a < np; ++a) {
    CHECK(e.X[2 * a] >= 0.0);
    CHECK(e.X[2 * a] < l1);
    CHECK(e.X[2 * a + 1] >= 0.0);
    CHECK(e.X[2 * a + 1] < l2);
  }
}

TEST_CASE("counter RNG depends only on its key") {
  CHECK(counter_uniform(1, 7, 0) == counter_uniform(1, 7, 0));
  CHECK(counter_uniform(1, 7, 0) != counter_uniform(1, 7, 1));
  CHECK(counter_uniform(1, 7, 0) != counter_uniform(2, 7, 0));
  double s = 0.0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    const double u = counter_uniform(3, i, 0);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    s += u;
  }
  CHECK(std::abs(s / 1e5 - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / 1e5));
}

TEST_CASE("invalid sampler arguments are rejected") {
  CHECK_THROWS_AS(sample_maxwellian_1d(0, kTemp, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(sample_maxwellian_1d(10, 0.0, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(sample_maxwellian_2d(10, -1.0, 1.0, 1.0, 1), ConfigError);
}
