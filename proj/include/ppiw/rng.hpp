#pragma once

#include <cstdint>

namespace ppiw::rng {

// splitmix64 finalizer; bijective on 64-bit words
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Derive an independent stream key from a base seed and up to two tags.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(seed ^ 0xD1B54A32D192ED03ULL) + mix64(a) + 0x8CB92BA72F3D8DD7ULL * b);
}

/// Counter-based uniform draw: the i-th variate of the stream `key`,
/// reproducible for any access order.
inline double uniform_at(std::uint64_t key, std::uint64_t index) {
  const std::uint64_t bits = mix64(key + (index + 1) * 0x9E3779B97F4A7C15ULL);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace ppiw::rng
