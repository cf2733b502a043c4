#pragma once

#include <cstdint>
#include <random>

namespace brw {

/// The engine used everywhere. std::mt19937_64 is fully specified by the
/// standard, so streams are identical across platforms for a given seed.
using Rng = std::mt19937_64;

struct Seed {
  std::uint64_t value = 0;
  friend bool operator==(Seed, Seed) = default;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child stream seed for (parent, index):
///   mix64(parent + 0x9E3779B97F4A7C15 * (index + 1))
/// Used for replicate seeds (parent = master seed, index = replicate) and for
/// sub-streams inside one replicate. Independent of execution order.
Seed derive_seed(Seed parent, std::uint64_t index) noexcept;

inline Rng make_rng(Seed seed) { return Rng{seed.value}; }

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace brw
