#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace claw {

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights on [-1,1].
inline constexpr std::array<double, 8> gk15_nodes = {
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};

inline constexpr std::array<double, 8> gk15_wk = {
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

inline constexpr std::array<double, 4> g7_w = {
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

struct GKResult {
  double integral;
  double error;
};

inline GKResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  double resk = gk15_wk[0] * f(c);
  double resg = g7_w[0] * f(c);
  for (int i = 1; i < 8; ++i) {
    const double dx = hw * gk15_nodes[static_cast<size_t>(i)];
    const double fsum = f(c - dx) + f(c + dx);
    resk += gk15_wk[static_cast<size_t>(i)] * fsum;
    if (i % 2 == 0) resg += g7_w[static_cast<size_t>(i / 2)] * fsum;
  }
  return {resk * hw, std::abs((resk - resg) * hw)};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a,b] to absolute tolerance.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-10, int max_depth = 30) {
  if (a == b) return 0.0;
  struct Seg {
    double a, b, tol;
    int depth;
  };
  double total = 0.0;
  std::vector<Seg> stack{{a, b, abs_tol, 0}};
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    auto r = detail::gk15(f, s.a, s.b);
    if (r.error <= s.tol || s.depth >= max_depth) {
      total += r.integral;
    } else {
      const double m = 0.5 * (s.a + s.b);
      stack.push_back({s.a, m, 0.5 * s.tol, s.depth + 1});
      stack.push_back({m, s.b, 0.5 * s.tol, s.depth + 1});
    }
  }
  return total;
}

/// Integrate with the integrand split at the given interior break abscissae.
inline double integrate_split(const std::function<double(double)>& f, double a, double b,
                              const std::vector<double>& breaks, double abs_tol = 1e-10) {
  std::vector<double> pts{a};
  for (double x : breaks)
    if (x > a && x < b) pts.push_back(x);
  pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    total += integrate(f, pts[i], pts[i + 1], abs_tol / static_cast<double>(pts.size()));
  return total;
}

/// 64-point Gauss-Legendre nodes/weights on [-1,1], generated once by
/// Newton iteration on the Legendre polynomial.
inline const std::vector<std::pair<double, double>>& gauss_legendre_64() {
  static const std::vector<std::pair<double, double>> table = [] {
    const int n = 64;
    std::vector<std::pair<double, double>> nw;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double dp = n * (x * p1 - p0) / (x * x - 1.0);
      nw.emplace_back(x, 2.0 / ((1.0 - x * x) * dp * dp));
    }
    return nw;
  }();
  return table;
}

/// Fixed 64-point Gauss-Legendre quadrature on [a,b].
inline double integrate_gl64(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  double sum = 0.0;
  for (const auto& [x, w] : gauss_legendre_64()) sum += w * f(c + hw * x);
  return sum * hw;
}

}  // namespace claw
