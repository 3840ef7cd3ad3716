#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "claw/errors.hpp"
#include "claw/interval.hpp"
#include "claw/optimize.hpp"

namespace claw {

enum class FluxShape { convex, concave, general };

/// A flux f with closed-form first and second derivatives on an open or
/// closed interval. Immutable after construction; safe for concurrent reads.
struct FluxModel {
  std::string name;
  Interval domain;
  std::function<double(double)> eval_f;
  std::function<double(double)> eval_df;
  std::function<double(double)> eval_d2f;
  FluxShape shape = FluxShape::general;

  double f(double u) const { return eval_f(u); }
  double df(double u) const { return eval_df(u); }
  double d2f(double u) const { return eval_d2f(u); }

  /// Same flux on a truncated domain (used by the u0-search).
  FluxModel restrict_to(const Interval& sub) const {
    FluxModel m = *this;
    m.domain = Interval(std::max(domain.lo, sub.lo), std::min(domain.hi, sub.hi));
    return m;
  }
};

inline FluxModel builtin_flux(const std::string& name) {
  if (name == "burgers") {
    return {name,
            Interval(-kInf, kInf),
            [](double u) { return 0.5 * u * u; },
            [](double u) { return u; },
            [](double) { return 1.0; },
            FluxShape::convex};
  }
  if (name == "lwr_greenshields") {
    // f1(rho) = rho (2 - rho) on [0,2]
    return {name,
            Interval(0.0, 2.0),
            [](double r) { return r * (2.0 - r); },
            [](double r) { return 2.0 - 2.0 * r; },
            [](double) { return -2.0; },
            FluxShape::concave};
  }
  if (name == "lwr_bonzani_mussone") {
    // f2(rho) = rho exp(-rho/(2-rho)) on [0,2]; continuous extension f2(2)=0.
    auto safe_g = [](double r) -> double {
      const double d = 2.0 - r;
      if (d <= 0.0) return kInf;
      return r / d;
    };
    return {name,
            Interval(0.0, 2.0),
            [safe_g](double r) {
              const double g = safe_g(r);
              return g > 700.0 ? 0.0 : r * std::exp(-g);
            },
            [safe_g](double r) {
              const double g = safe_g(r);
              if (g > 700.0) return 0.0;
              const double d = 2.0 - r;
              const double gp = 2.0 / (d * d);
              return std::exp(-g) * (1.0 - r * gp);
            },
            [safe_g](double r) {
              const double g = safe_g(r);
              if (g > 700.0) return 0.0;
              const double d = 2.0 - r;
              const double gp = 2.0 / (d * d);
              const double gpp = 4.0 / (d * d * d);
              return std::exp(-g) * (r * gp * gp - 2.0 * gp - r * gpp);
            },
            FluxShape::general};
  }
  if (name == "kynch_mw") {
    // f3(u) = -u (1-u)^2 on [0,1]
    return {name,
            Interval(0.0, 1.0),
            [](double u) { return -u * (1.0 - u) * (1.0 - u); },
            [](double u) { return -1.0 + 4.0 * u - 3.0 * u * u; },
            [](double u) { return 4.0 - 6.0 * u; },
            FluxShape::general};
  }
  throw UnknownFlux(name);
}

enum class DerivOrder { df, d2f };

struct SupNormReport {
  double value = 0.0;
  double arg = 0.0;
};

/// sup of |f'| or |f''| over J, by dense grid plus golden-section refinement
/// around the strongest grid maxima. Throws UnboundedNorm past the overflow
/// guard (1e12).
inline SupNormReport sup_norm_report(const FluxModel& model, DerivOrder which,
                                     Interval J, int grid = 4096) {
  if (!model.domain.contains(J))
    throw DomainError("sup_norm_on: J not contained in flux domain");
  if (!J.finite()) {
    // H2(i)-style fluxes have |f'|,|f''| bounded at infinity; probe a wide
    // finite window and check the tails are non-increasing.
    const double big = 1e6;
    const Interval probe(std::max(J.lo, -big), std::min(J.hi, big));
    auto r = sup_norm_report(model, which, probe, grid);
    const auto& g = which == DerivOrder::df ? model.eval_df : model.eval_d2f;
    const double tail = std::max(std::isfinite(J.lo) ? 0.0 : std::abs(g(-2.0 * big)),
                                 std::isfinite(J.hi) ? 0.0 : std::abs(g(2.0 * big)));
    if (tail > r.value) throw UnboundedNorm(model.name + ": derivative grows at infinity");
    return r;
  }
  const auto& g = which == DerivOrder::df ? model.eval_df : model.eval_d2f;
  auto r = grid_max([&](double u) { return std::abs(g(u)); }, J.lo, J.hi, grid, 8, 1e-12);
  if (r.value > 1e12) throw UnboundedNorm(model.name + ": sup norm exceeds overflow guard");
  return {r.value, r.arg};
}

inline double sup_norm_on(const FluxModel& model, DerivOrder which, Interval J) {
  return sup_norm_report(model, which, J).value;
}

namespace detail {

/// Monotone-preserving piecewise-cubic slopes (Fritsch-Carlson).
inline std::vector<double> pchip_slopes(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  const size_t n = x.size();
  std::vector<double> d(n, 0.0), delta(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) delta[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
  d[0] = delta[0];
  d[n - 1] = delta[n - 2];
  for (size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      d[i] = 0.0;
    } else {
      const double w1 = 2.0 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
      const double w2 = (x[i + 1] - x[i]) + 2.0 * (x[i] - x[i - 1]);
      d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  return d;
}

struct CubicTable {
  std::vector<double> x, y, d;  // knots, values, slopes

  double eval(double u) const {
    const size_t i = seg(u);
    const double h = x[i + 1] - x[i];
    const double s = (u - x[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y[i] + (s3 - 2 * s2 + s) * h * d[i] +
           (-2 * s3 + 3 * s2) * y[i + 1] + (s3 - s2) * h * d[i + 1];
  }

  double deriv(double u) const {
    const size_t i = seg(u);
    const double h = x[i + 1] - x[i];
    const double s = (u - x[i]) / h;
    return ((6 * s * s - 6 * s) * (y[i] - y[i + 1]) / h) + (3 * s * s - 4 * s + 1) * d[i] +
           (3 * s * s - 2 * s) * d[i + 1];
  }

  size_t seg(double u) const {
    auto it = std::upper_bound(x.begin(), x.end(), u);
    size_t i = static_cast<size_t>(it - x.begin());
    if (i > 0) --i;
    if (i + 1 >= x.size()) i = x.size() - 2;
    return i;
  }
};

}  // namespace detail

/// Load a custom flux from CSV with header "u,f,df,d2f" and strictly
/// increasing u column. f is interpolated as a cubic Hermite using the
/// tabulated df; d2f by monotone cubic interpolation of its samples.
/// Derivative consistency is checked at segment midpoints.
inline FluxModel load_flux_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open flux file: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("u,f,df,d2f", 0) != 0)
    throw ConfigError("flux CSV must start with header 'u,f,df,d2f': " + path);
  std::vector<double> u, f, df, d2f;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double a, b, c, d;
    char comma;
    if (!(ss >> a >> comma >> b >> comma >> c >> comma >> d))
      throw ConfigError("malformed flux CSV row: " + line);
    if (!u.empty() && a <= u.back())
      throw ConfigError("flux CSV u column must be strictly increasing");
    u.push_back(a);
    f.push_back(b);
    df.push_back(c);
    d2f.push_back(d);
  }
  if (u.size() < 4) throw ConfigError("flux CSV needs at least 4 samples");

  auto ftab = std::make_shared<detail::CubicTable>();
  ftab->x = u;
  ftab->y = f;
  ftab->d = df;
  auto d2tab = std::make_shared<detail::CubicTable>();
  d2tab->x = u;
  d2tab->y = d2f;
  d2tab->d = detail::pchip_slopes(u, d2f);

  // consistency: Hermite derivative vs tabulated df trend at midpoints
  for (size_t i = 0; i + 1 < u.size(); ++i) {
    const double h = u[i + 1] - u[i];
    const double mid = 0.5 * (u[i] + u[i + 1]);
    const double secant = (f[i + 1] - f[i]) / h;
    const double dmid = ftab->deriv(mid);
    if (std::abs(dmid - secant) > 10.0 * (std::abs(secant) + 1.0))
      throw ConfigError("flux CSV derivative column inconsistent with f near u=" +
                        std::to_string(mid));
  }

  FluxModel m;
  m.name = "custom";
  m.domain = Interval(u.front(), u.back());
  m.eval_f = [ftab](double v) { return ftab->eval(v); };
  m.eval_df = [ftab](double v) { return ftab->deriv(v); };
  m.eval_d2f = [d2tab](double v) { return d2tab->eval(v); };
  bool cvx = true, ccv = true;
  for (double v : d2f) {
    cvx = cvx && v >= -1e-12;
    ccv = ccv && v <= 1e-12;
  }
  m.shape = cvx ? FluxShape::convex : (ccv ? FluxShape::concave : FluxShape::general);
  return m;
}

}  // namespace claw
