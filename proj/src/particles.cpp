#include "vlpic/particles.hpp"

#include "vlpic/errors.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>

namespace vlpic {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_sampler(std::size_t np, double temperature) {
  if (np < 1) throw ConfigError("particles.np must be >= 1");
  if (!(temperature > 0.0)) throw ConfigError("particles.temperature must be positive");
}

} // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  const std::uint64_t h = splitmix64(splitmix64(splitmix64(seed) ^ index) ^ (stream << 1 | 1));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double counter_normal(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  // Midpoint of the 2^-53 bin keeps u strictly inside (0, 1).
  const double u = counter_uniform(seed, index, stream) + 0x1.0p-54;
  return std::numbers::sqrt2 * boost::math::erf_inv(2.0 * u - 1.0);
}

ParticleEnsemble sample_maxwellian_1d(std::size_t np, double temperature, double length,
                                      std::uint64_t seed) {
  check_sampler(np, temperature);
  ParticleEnsemble e;
  e.dim = 1;
  e.X.resize(np);
  e.P.resize(np);
  e.S.assign(3 * np, 0.0);
  e.W.assign(np, length / static_cast<double>(np));
  const double spacing = length / static_cast<double>(np);
  const double sigma = std::sqrt(temperature);
  for (std::size_t a = 0; a < np; ++a) {
    e.X[a] = (static_cast<double>(a) + counter_uniform(seed, a, 0)) * spacing;
    e.P[a] = sigma * counter_normal(seed, a, 1);
  }
  return e;
}

ParticleEnsemble sample_maxwellian_2d(std::size_t np, double temperature, double length1,
                                      double length2, std::uint64_t seed) {
  check_sampler(np, temperature);
  ParticleEnsemble e;
  e.dim = 2;
  e.X.resize(2 * np);
  e.P.resize(2 * np);
  e.S.assign(3 * np, 0.0);
  e.W.assign(np, length1 * length2 / static_cast<double>(np));
  const auto n1 = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(np) * length1 / length2)));
  const std::size_t n2 = (np + n1 - 1) / n1;
  const double sigma = std::sqrt(temperature);
  for (std::size_t a = 0; a < np; ++a) {
    const std::size_t i1 = a % n1;
    const std::size_t i2 = a / n1;
    e.X[2 * a] = (static_cast<double>(i1) + counter_uniform(seed, a, 0)) * length1 /
                 static_cast<double>(n1);
    e.X[2 * a + 1] = (static_cast<double>(i2) + counter_uniform(seed, a, 2)) * length2 /
                     static_cast<double>(n2);
    e.P[2 * a] = sigma * counter_normal(seed, a, 1);
    e.P[2 * a + 1] = sigma * counter_normal(seed, a, 3);
  }
  return e;
}

void init_spin_delta(ParticleEnsemble& ensemble, const Vec3& direction) {
  const double norm = std::sqrt(direction[0] * direction[0] + direction[1] * direction[1] +
                                direction[2] * direction[2]);
  if (std::abs(norm - 1.0) > 1e-12)
    throw ConfigError("particles.spin_direction must be a unit vector (norm " +
                      std::to_string(norm) + ")");
  for (std::size_t a = 0; a < ensemble.size(); ++a) ensemble.set_spin(a, direction);
}

} // namespace vlpic
