#include "vlpic/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace vlpic {

void run_blocks(std::size_t n, int workers,
                const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t nblocks = block_count(n);
  const auto nthreads =
      static_cast<std::size_t>(std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)),
                                                       1, std::max<std::size_t>(nblocks, 1)));
  if (nthreads <= 1) {
    for (std::size_t b = 0; b < nblocks; ++b)
      fn(b, b * kParticleBlock, std::min(n, (b + 1) * kParticleBlock));
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t b = next.fetch_add(1);
          if (b >= nblocks) return;
          try {
            fn(b, b * kParticleBlock, std::min(n, (b + 1) * kParticleBlock));
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

BlockDeposit::BlockDeposit(std::size_t particles, std::size_t length) { resize(particles, length); }

void BlockDeposit::resize(std::size_t particles, std::size_t length) {
  blocks_ = std::max<std::size_t>(block_count(particles), 1);
  length_ = length;
  data_.assign(blocks_ * length_, 0.0);
}

std::span<double> BlockDeposit::buffer(std::size_t block) {
  return {data_.data() + block * length_, length_};
}

void BlockDeposit::clear() { std::fill(data_.begin(), data_.end(), 0.0); }

void BlockDeposit::reduce(std::span<double> out) {
  // Pairwise tree: stride 1, 2, 4, ... always combining block b with b + stride.
  for (std::size_t stride = 1; stride < blocks_; stride *= 2) {
    for (std::size_t b = 0; b + stride < blocks_; b += 2 * stride) {
      double* dst = data_.data() + b * length_;
      const double* src = data_.data() + (b + stride) * length_;
      for (std::size_t i = 0; i < length_; ++i) dst[i] += src[i];
    }
  }
  std::copy(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(length_), out.begin());
}

} // namespace vlpic
