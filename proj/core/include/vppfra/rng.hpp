#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace vppfra {

// Deterministic RNG with labeled substreams. One user-facing seed fans out to
// independent streams via FNV hashing of a label plus a stream index, so
// parallel and serial execution draw identical numbers per logical stream.
// Mapping from bits to doubles is done by hand to keep output byte-identical
// across standard libraries.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view label, std::uint64_t stream = 0)
      : state_(mix(seed, label, stream)) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // standard normal via Box-Muller (one value per call, cache discarded for
  // reproducibility independent of call pairing)
  double normal() {
    double u1 = next_double();
    double u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

 private:
  static std::uint64_t mix(std::uint64_t seed, std::string_view label, std::uint64_t stream) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    auto eat = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffULL;
        h *= 0x100000001b3ULL;
      }
    };
    eat(seed);
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    eat(stream);
    return h;
  }

  std::uint64_t state_;
};

}  // namespace vppfra
