#include "qbplab/rng.hpp"

#include <cmath>
#include <limits>

namespace qbplab {

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  constexpr double two_pi = 6.283185307179586476925286766559;
  const double u1 = 1.0 - uniform();  // (0, 1], keeps log() finite
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  spare_ = radius * std::sin(two_pi * u2);
  has_spare_ = true;
  return radius * std::cos(two_pi * u2);
}

std::size_t RngStream::bounded(std::size_t n) {
  const std::uint64_t span = static_cast<std::uint64_t>(n);
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  // Number of values that would make the final modulo biased.
  const std::uint64_t excess = (max % span + 1) % span;
  const std::uint64_t limit = max - excess;
  std::uint64_t draw = next_u64();
  while (draw > limit) {
    draw = next_u64();
  }
  return static_cast<std::size_t>(draw % span);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b) {
  std::uint64_t state = master;
  std::uint64_t mixed = splitmix64(state);
  state ^= (a + 1) * 0x9E3779B97F4A7C15ULL;
  mixed ^= splitmix64(state);
  state ^= (b + 1) * 0xC2B2AE3D27D4EB4FULL;
  mixed ^= splitmix64(state);
  return mixed;
}

}  // namespace qbplab
