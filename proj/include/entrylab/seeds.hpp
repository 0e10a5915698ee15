#pragma once

#include <cstdint>

namespace entrylab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream seed for (master, stream, index).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

// Stream tags.
inline constexpr std::uint64_t kAtmosphereStream = 0xA7;
inline constexpr std::uint64_t kNoiseStream = 0x0153;
inline constexpr std::uint64_t kDropoutStream = 0xD0;
inline constexpr std::uint64_t kShuffleStream = 0x5F;
inline constexpr std::uint64_t kInitStream = 0x1417;

}  // namespace entrylab
