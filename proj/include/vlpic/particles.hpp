#pragma once

#include "vlpic/derham.hpp"

#include <cstdint>
#include <vector>

namespace vlpic {

/// Marker particles of the distribution function. Positions and momenta are
/// stored interleaved per particle (`dim` entries each), spins as triples.
struct ParticleEnsemble {
  int dim = 1;
  std::vector<double> X;
  std::vector<double> P;
  std::vector<double> S;
  std::vector<double> W;

  std::size_t size() const { return W.size(); }
  Vec3 spin(std::size_t a) const { return {S[3 * a], S[3 * a + 1], S[3 * a + 2]}; }
  void set_spin(std::size_t a, const Vec3& s) {
    S[3 * a] = s[0];
    S[3 * a + 1] = s[1];
    S[3 * a + 2] = s[2];
  }
};

/// Uniform double in [0, 1) from a counter-based hash of (seed, index, stream).
double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream);

/// Standard normal deviate by inverse CDF of counter_uniform.
double counter_normal(std::uint64_t seed, std::uint64_t index, std::uint64_t stream);

/// Quiet-start Maxwellian on [0, L): particle a sits at (a + u_a) L / Np,
/// momenta are N(0, T), weights L / Np, spins zero.
ParticleEnsemble sample_maxwellian_1d(std::size_t np, double temperature, double length,
                                      std::uint64_t seed);

/// 2D analogue on [0, L1) x [0, L2): jittered lattice positions, independent
/// N(0, T) momentum components, weights L1 L2 / Np.
ParticleEnsemble sample_maxwellian_2d(std::size_t np, double temperature, double length1,
                                      double length2, std::uint64_t seed);

/// Sets every spin to `direction`, which must be a unit vector.
void init_spin_delta(ParticleEnsemble& ensemble, const Vec3& direction);

} // namespace vlpic
