#pragma once

// Counter-based random numbers. Every draw is a pure function of
// (key, counter), so results never depend on evaluation order or thread
// scheduling. Keys are derived by hashing tags, which keeps streams for
// different purposes (design, noise, auxiliary panel, prior coefficients)
// disjoint.

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string_view>

namespace torusinv {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Combine a seed with any number of integer coordinates into a stream key.
inline constexpr std::uint64_t derive_key(std::uint64_t seed,
                                          std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t k = splitmix64(seed ^ 0x5851F42D4C957F2DULL);
  for (auto p : parts) k = splitmix64(k ^ splitmix64(p + 0x2545F4914F6CDD1DULL));
  return k;
}

inline constexpr std::uint64_t derive_key(std::uint64_t seed, std::string_view tag,
                                          std::initializer_list<std::uint64_t> parts = {}) noexcept {
  std::uint64_t k = derive_key(seed, {hash_tag(tag)});
  for (auto p : parts) k = splitmix64(k ^ splitmix64(p + 0x2545F4914F6CDD1DULL));
  return k;
}

/// Uniform in (0, 1), never exactly 0 or 1.
inline double uniform_at(std::uint64_t key, std::uint64_t counter) noexcept {
  const std::uint64_t bits = splitmix64(key ^ splitmix64(counter));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on two counter slots.
inline double normal_at(std::uint64_t key, std::uint64_t counter) noexcept {
  const double u1 = uniform_at(key, 2 * counter);
  const double u2 = uniform_at(key, 2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential view over one keyed stream.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) noexcept : key_(key) {}

  double uniform() noexcept { return uniform_at(key_, counter_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept { return normal_at(key_ ^ 0xA24BAED4963EE407ULL, counter_++); }
  std::size_t index(std::size_t n) noexcept {
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }
  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace torusinv
