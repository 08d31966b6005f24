#pragma once

#include "vlpic/config.hpp"
#include "vlpic/particles.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vlpic {

/// Complete restartable state. Binary layout, all little-endian:
///   "VLPIC1", u32 version, u32 model tag (1 or 2), u64 Np,
///   per axis: u32 cells, u32 degree,
///   coefficient vectors as f64 (1D: e_x e_y e_z a_y a_z; 2D: e_xy b_z e_z a_z),
///   X, P, S, W as f64, time f64, step u64, H0 f64.
struct Checkpoint {
  Model model = Model::one_d;
  std::array<std::uint32_t, 2> cells{0, 0};
  std::array<std::uint32_t, 2> degree{0, 0};
  std::vector<Vec> coeffs;
  ParticleEnsemble ensemble;
  double time = 0.0;
  std::uint64_t step = 0;
  double h0 = 0.0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws IoError on unreadable, truncated or malformed files.
Checkpoint read_checkpoint(const std::string& path);

} // namespace vlpic
