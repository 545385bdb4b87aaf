/// @file sampling.hpp
/// Seed derivation, quasi-random points and a deterministic work queue.
#pragma once

#include <atomic>
#include <boost/random/sobol.hpp>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lmeasure {

/// Independent stream seed for shard `stream` of a run seeded with `master` (splitmix64).
[[nodiscard]] constexpr std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Sobol points in [0,1)^d; the all-zero first point is skipped.
class QuasiRandom {
 public:
  explicit QuasiRandom(std::size_t dim) : dim_(dim), engine_(dim == 0 ? 1 : dim) {
    engine_.discard(dim_ == 0 ? 1 : dim_);
  }

  [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }

  void next(std::vector<double>& out) {
    out.resize(dim_);
    // 64-bit lattice values; keep the top 53 bits and shift off the cell corner
    for (auto& x : out) x = std::ldexp(static_cast<double>(engine_() >> 11) + 0.5, -53);
  }

 private:
  std::size_t dim_;
  boost::random::sobol engine_;
};

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Results must be
/// written to per-index slots so the outcome does not depend on scheduling.
template <class Fn>
void parallelFor(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> nextIndex{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = nextIndex.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard lock(failureMutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::jthread> pool;
  const auto n = static_cast<std::size_t>(workers) < count ? workers : static_cast<unsigned>(count);
  pool.reserve(n);
  for (unsigned w = 0; w < n; ++w) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace lmeasure
