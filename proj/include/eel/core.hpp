#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace eel {

using Rng = std::mt19937_64;

/// Malformed configuration, flags or spec values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable, malformed or too-short input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a; stable across platforms, unlike std::hash.
inline constexpr std::uint64_t fnv1a(std::string_view text,
                                     std::uint64_t h = 0xCBF29CE484222325ULL) noexcept {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Stage seed = hash(master, label, a, b). Any stage of an experiment can be
/// replayed in isolation from the master seed and its coordinates.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                           std::uint64_t a = 0, std::uint64_t b = 0) noexcept {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ fnv1a(label));
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x632BE59BD9B4E019ULL));
  return h;
}

}  // namespace eel
