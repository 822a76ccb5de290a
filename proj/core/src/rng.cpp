#include "ucgrad/rng.hpp"

#include <cmath>
#include <numbers>

namespace ucgrad::rng {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kMixB = 0xBF58476D1CE4E5B9ULL;
constexpr std::uint64_t kMixC = 0x94D049BB133111EBULL;
constexpr std::uint64_t kStreamB = 0xC2B2AE3D27D4EB4FULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= kMixB;
  x ^= x >> 27;
  x *= kMixC;
  x ^= x >> 31;
  return x;
}

std::uint64_t mix_stream(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t h = base;
  h = mix64(h ^ (kGamma * (a + 1)));
  h = mix64(h ^ (kStreamB * (b + 1)));
  return h;
}

std::uint64_t CounterStream::next_u64() noexcept {
  ++counter_;
  return mix64(seed_ + counter_ * kGamma);
}

double CounterStream::next_double() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterStream::next_gaussian() noexcept {
  // u1 in (0,1] so log never sees zero
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double CounterStream::next_rademacher() noexcept {
  return (next_u64() & 1u) ? 1.0 : -1.0;
}

Vector CounterStream::gaussian_vector(Eigen::Index n, double stddev) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = stddev * next_gaussian();
  return v;
}

Vector CounterStream::rademacher_vector(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = next_rademacher();
  return v;
}

}  // namespace ucgrad::rng
