#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace waveobs {

/// SplitMix64: 64-bit-state generator (Steele, Lea, Flood 2014). Chosen for
/// reproducibility: the output sequence is fully specified here, independent
/// of platform or standard library. Streams for independent runs are derived
/// by hashing (seed, row-id), see derive_stream.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in (0,1): 53 mantissa bits, never exactly 0 or 1.
  double next_uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  /// Standard normal by Box-Muller; both variates of a pair are consumed.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// FNV-1a hash of a row identifier, mixed with the run seed. Distinct row ids
/// give independent, reproducible substreams of one named run.
inline std::uint64_t derive_stream(std::uint64_t seed, std::string_view row_id) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : row_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h ^ (seed * 0x9e3779b97f4a7c15ULL);
}

} // namespace waveobs
