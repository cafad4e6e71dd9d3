#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ltseval/angles.hpp"

namespace ltseval {

// Deterministic random source with a pinned draw sequence. std::mt19937_64 is
// bit-exact across platforms; the distributions are implemented here instead
// of via <random> adaptors because those are implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in (0, 1]; never returns 0 so it is safe under log().
  double uniform01() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller. Always exactly two engine draws.
  double gauss() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ltseval
