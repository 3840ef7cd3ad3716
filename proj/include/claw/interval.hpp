#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace claw {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Interval (lo, hi); endpoints may be infinite for flux domains.
/// State intervals are always finite.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  Interval() = default;
  // Degenerate lo == hi is allowed for state hulls (constant profiles).
  Interval(double l, double h) : lo(l), hi(h) { assert(lo <= hi); }

  bool finite() const { return std::isfinite(lo) && std::isfinite(hi); }
  double length() const { return hi - lo; }

  bool contains(double u) const { return u >= lo && u <= hi; }
  bool contains(const Interval& j) const { return j.lo >= lo && j.hi <= hi; }

  double clamp(double u) const { return std::min(hi, std::max(lo, u)); }

  static Interval hull(double u, double v) {
    return u <= v ? Interval(u, v) : Interval(v, u);
  }

  Interval widened(double m) const { return Interval(lo - m, hi + m); }
};

inline double positive_part(double x) { return x > 0 ? x : 0.0; }
inline double negative_part(double x) { return x < 0 ? -x : 0.0; }

}  // namespace claw
