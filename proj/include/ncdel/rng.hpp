#pragma once

#include <cmath>
#include <cstdint>

namespace ncdel {

/// Counter-based stream: the state is a pure function of (seed, keys), so every replica and
/// matrix gets an independent, schedule-independent sequence. Normal variates use Box-Muller
/// here because the standard library distributions differ between implementations.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t k1, std::uint64_t k2 = 0, std::uint64_t k3 = 0) {
    state_ = mix(seed ^ mix(k1 + 0x9e3779b97f4a7c15ULL) ^ mix(mix(k2) + k3 * 0xbf58476d1ce4e5b9ULL));
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in (0, 1).
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform(), u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * M_PI * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  double sign() { return (next() >> 63) ? 1.0 : -1.0; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ncdel
