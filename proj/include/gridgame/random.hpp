#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace gridgame {

// splitmix64 step; used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/**
 * mt19937_64 wrapper with hand-rolled draw helpers so simulation output is
 * reproducible byte-for-byte from a seed (standard-library distributions are
 * implementation-defined and would tie outputs to a particular libstdc++).
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]; keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Index drawn proportionally to the (not necessarily normalized) masses.
  int categorical(const double* mass, int n) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += mass[i];
    double x = uniform() * total;
    for (int i = 0; i < n; ++i) {
      x -= mass[i];
      if (x < 0.0) return i;
    }
    for (int i = n - 1; i >= 0; --i)  // fp fallthrough: last index with mass
      if (mass[i] > 0.0) return i;
    return n - 1;
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Stable sub-seed for a named stream of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the stream tag
  for (char ch : stream) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  std::uint64_t state = master ^ h;
  return splitmix64(state);
}

}  // namespace gridgame
