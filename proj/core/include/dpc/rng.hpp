#pragma once

#include <cmath>
#include <cstdint>

namespace dpc {

/// Counter-based generator: output i is mix64(seed0 + i * gamma), the
/// SplitMix64 construction. Substreams are derived by hashing (seed, stream)
/// so replications get disjoint, documented streams. All draws are
/// platform-independent; a normal deviate always consumes two uniforms
/// (Box-Muller, cosine branch).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ kGolden)) {}

  static Rng stream(std::uint64_t seed, std::uint64_t stream_index) {
    return Rng(mix(seed + kGolden) ^ mix(stream_index * kGolden + kGolden));
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  // uniform on [0, 1)
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform on (0, 1]
  double next_uniform_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  double next_normal() {
    const double u1 = next_uniform_open();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace dpc
