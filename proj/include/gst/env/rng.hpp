#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "gst/error.hpp"

namespace gst {

// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t stream) {
  return MixSeed(base ^ MixSeed(stream + 0x632BE59BD9B4E019ULL));
}

// Thin wrapper over mt19937_64 with platform-independent sampling helpers
// (std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform in [0, 1).
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t Below(std::uint64_t n) {
    if (n == 0) throw ContractError("Rng::Below(0)");
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }
  int IntIn(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(Below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Index drawn from an (unnormalized, non-negative) weight vector.
  template <typename T>
  std::size_t Categorical(std::span<const T> weights) {
    double total = 0;
    for (T w : weights) total += static_cast<double>(w);
    if (!(total > 0)) throw ContractError("categorical with zero total weight");
    double u = Uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      u -= static_cast<double>(weights[i]);
      if (u < 0) return i;
    }
    for (std::size_t i = weights.size(); i-- > 0;) {
      if (weights[i] > T(0)) return i;
    }
    return 0;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace gst
