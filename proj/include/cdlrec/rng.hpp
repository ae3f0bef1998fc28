#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace cdlrec {

// FNV-1a, used for seed derivation and artifact checksums.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Stable fan-out of one global seed into per-stage and per-user streams, so
// parallel and serial generation orders agree.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
  return splitmix64(base ^ fnv1a64(label));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label,
                                 std::string_view id) {
  return splitmix64(derive_seed(base, label) ^ fnv1a64(id));
}

// Deterministic random stream. The distributions live here instead of
// <random> because the standard leaves their algorithms unspecified; the
// engine itself (mt19937_64) is fully pinned by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n); n must be positive
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Box-Muller, two uniforms per draw.
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  std::string serialize() const {
    std::ostringstream oss;
    oss << engine_;
    return oss.str();
  }

  void deserialize(const std::string& text) {
    std::istringstream iss(text);
    iss >> engine_;
  }

  bool operator==(const Rng& other) const { return engine_ == other.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace cdlrec
