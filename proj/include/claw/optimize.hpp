#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "claw/interval.hpp"

namespace claw {

/// Golden-section search for the maximum of f on [a,b].
/// Returns the abscissa of the maximum to tolerance tol.
inline double golden_section_max(const std::function<double(double)>& f,
                                 double a, double b, double tol = 1e-10) {
  static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  if (a > b) std::swap(a, b);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  // iteration cap: with large |a|, |b| the width bottoms out at a few ulps
  // and can never reach an absolute tolerance
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    if (fc < fd) {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    } else {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    }
  }
  return 0.5 * (a + b);
}

struct GridMaxResult {
  double value = -kInf;
  double arg = 0.0;
};

/// Maximize f over [lo,hi]: dense grid of n points, then golden-section
/// refinement around the top `refine` local grid maxima.
inline GridMaxResult grid_max(const std::function<double(double)>& f,
                              double lo, double hi, int n = 4096,
                              int refine = 8, double tol = 1e-10) {
  GridMaxResult best;
  if (hi <= lo) {
    best.value = f(lo);
    best.arg = lo;
    return best;
  }
  std::vector<double> vals(static_cast<size_t>(n));
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) vals[static_cast<size_t>(i)] = f(lo + i * h);

  // indices of local maxima, sorted by value
  std::vector<int> peaks;
  for (int i = 0; i < n; ++i) {
    const double v = vals[static_cast<size_t>(i)];
    const bool up = (i == 0) || v >= vals[static_cast<size_t>(i - 1)];
    const bool down = (i == n - 1) || v >= vals[static_cast<size_t>(i + 1)];
    if (up && down) peaks.push_back(i);
  }
  std::sort(peaks.begin(), peaks.end(), [&](int i, int j) {
    return vals[static_cast<size_t>(i)] > vals[static_cast<size_t>(j)];
  });
  if (static_cast<int>(peaks.size()) > refine) peaks.resize(static_cast<size_t>(refine));

  for (int idx : peaks) {
    const double a = std::max(lo, lo + (idx - 1) * h);
    const double b = std::min(hi, lo + (idx + 1) * h);
    const double x = golden_section_max(f, a, b, tol);
    const double v = f(x);
    if (v > best.value) {
      best.value = v;
      best.arg = x;
    }
  }
  return best;
}

}  // namespace claw
