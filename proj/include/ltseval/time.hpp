#pragma once

#include <cmath>
#include <compare>
#include <cstdint>

namespace ltseval {

// Nanoseconds since an arbitrary epoch. int64 covers +-292 years at 1 ns,
// far beyond the +-10^4 s any experiment needs.
struct Timestamp {
  std::int64_t ns = 0;

  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;

  static Timestamp from_seconds(double s) {
    return Timestamp{static_cast<std::int64_t>(std::llround(s * 1e9))};
  }
  double seconds() const { return static_cast<double>(ns) * 1e-9; }

  Timestamp operator+(std::int64_t delta_ns) const { return Timestamp{ns + delta_ns}; }
  Timestamp operator-(std::int64_t delta_ns) const { return Timestamp{ns - delta_ns}; }
  std::int64_t operator-(const Timestamp& other) const { return ns - other.ns; }
};

inline double to_seconds(std::int64_t delta_ns) { return static_cast<double>(delta_ns) * 1e-9; }
inline std::int64_t to_nanoseconds(double s) { return static_cast<std::int64_t>(std::llround(s * 1e9)); }

}  // namespace ltseval
