#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace vlpic {

/// Particles are processed in fixed-size blocks; block boundaries never depend
/// on the worker count, so reductions over blocks are reproducible bitwise.
inline constexpr std::size_t kParticleBlock = 256;

inline std::size_t block_count(std::size_t n) { return (n + kParticleBlock - 1) / kParticleBlock; }

/// Calls fn(block, begin, end) for every block, on up to `workers` threads.
void run_blocks(std::size_t n, int workers,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

/// Per-block accumulation buffers combined by a fixed-shape pairwise tree.
class BlockDeposit {
public:
  BlockDeposit() = default;
  BlockDeposit(std::size_t particles, std::size_t length);

  void resize(std::size_t particles, std::size_t length);
  std::size_t blocks() const { return blocks_; }
  std::span<double> buffer(std::size_t block);
  void clear();
  /// Writes the sum over all blocks into `out` (overwrites).
  void reduce(std::span<double> out);

private:
  std::size_t blocks_ = 0;
  std::size_t length_ = 0;
  std::vector<double> data_;
};

} // namespace vlpic
