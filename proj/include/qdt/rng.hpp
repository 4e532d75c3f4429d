#pragma once

#include <cstdint>
#include <random>
#include <string_view>

// All randomness in the pipeline flows from one user seed through named
// substreams, so stages (source, detection, counts, bootstrap) can be
// re-run or parallelized independently with identical results.

namespace qdt {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::uint64_t substream_seed(std::uint64_t seed, std::string_view name,
                                    std::uint64_t index) {
  std::uint64_t s = seed ^ fnv1a(name);
  splitmix64(s);
  s ^= 0x6a09e667f3bcc909ULL + index * 0x9e3779b97f4a7c15ULL;
  return splitmix64(s);
}

inline std::mt19937_64 make_substream(std::uint64_t seed, std::string_view name,
                                      std::uint64_t index) {
  return std::mt19937_64(substream_seed(seed, name, index));
}

}  // namespace qdt
