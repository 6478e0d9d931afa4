#pragma once

// Counter-based seed splitting. Every random stream in the project is
// derived from one 64-bit root seed and a stream tag, so module-level
// determinism composes: split(seed, tag) feeds splitmix64 rounds of
// (seed, fnv1a(tag)) and the result seeds an independent mt19937_64.

#include <cstdint>
#include <random>
#include <string_view>

namespace annlab::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t split(std::uint64_t seed, std::string_view tag,
                           std::uint64_t counter = 0) {
  std::uint64_t state = seed;
  splitmix64(state);
  state ^= fnv1a(tag);
  splitmix64(state);
  state ^= counter;
  return splitmix64(state);
}

inline std::mt19937_64 engine(std::uint64_t seed, std::string_view tag,
                              std::uint64_t counter = 0) {
  return std::mt19937_64(split(seed, tag, counter));
}

}  // namespace annlab::rng
