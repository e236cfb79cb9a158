#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fairsched {

/// splitmix64 finalizer; also used to derive stable token ids.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Root of all randomness in a run. Each consumer asks for a named
/// substream, so adding a consumer never shifts another one's draws.
class SeedSource {
 public:
  explicit SeedSource(std::uint64_t seed) : seed_(seed) {}

  std::mt19937_64 stream(std::string_view name) const {
    return std::mt19937_64(mix64(seed_ ^ fnv1a(name)));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

}  // namespace fairsched
