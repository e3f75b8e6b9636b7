#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace qbplab {

// Seeded random stream with explicitly spelled-out distribution transforms.
// The standard library's distribution objects are implementation-defined, so
// uniform/normal/bounded draws are written out here to keep every sampled
// dataset bit-reproducible for a given seed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1), 53 bits of precision.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal();

  // Uniform integer in [0, n); modulo bias removed by rejection.
  std::size_t bounded(std::size_t n);

  // Fisher-Yates shuffle driven by bounded().
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[bounded(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derives an isolated child seed from a master seed and up to two stream
// tags (e.g. repetition index, stream role). Independent tags give
// decorrelated streams, so work units can be recomputed in any order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0);

}  // namespace qbplab
