#pragma once

#include <cstdint>

#include "ucgrad/common.hpp"

namespace ucgrad::rng {

// SplitMix64 finalizer. Used both as the per-draw output function and as
// the stream-seed mixer, so every draw is addressable as mix64(seed + i*gamma)
// independent of which thread produces it.
std::uint64_t mix64(std::uint64_t x) noexcept;

// Derives a stream seed from (base, a, b). Distinct (a, b) pairs give
// decorrelated streams; used as mix_stream(base_seed, outer_iter, pair_index).
std::uint64_t mix_stream(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept;

// Counter-based generator: draw i of a stream is a pure function of
// (seed, i). Gaussians consume exactly two counters each (Box-Muller without
// caching), so the stream position after n draws is schedule-independent.
class CounterStream {
 public:
  explicit CounterStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() noexcept;
  // uniform in [0, 1)
  double next_double() noexcept;
  double next_gaussian() noexcept;
  // entries are +1 or -1
  double next_rademacher() noexcept;

  Vector gaussian_vector(Eigen::Index n, double stddev = 1.0);
  Vector rademacher_vector(Eigen::Index n);

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace ucgrad::rng
