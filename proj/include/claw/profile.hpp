#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "claw/errors.hpp"
#include "claw/interval.hpp"
#include "claw/quadrature.hpp"

namespace claw {

/// C1 spatial profile: cubic Hermite pieces through (x, u, du) knots.
/// Value/derivative extrema and variations are closed-form per segment.
class ProfileC1 {
 public:
  ProfileC1() = default;
  ProfileC1(std::vector<double> xs, std::vector<double> us, std::vector<double> dus)
      : x_(std::move(xs)), u_(std::move(us)), du_(std::move(dus)) {
    assert(x_.size() >= 2 && x_.size() == u_.size() && x_.size() == du_.size());
  }

  static ProfileC1 from_function(const std::function<double(double)>& f,
                                 const std::function<double(double)>& df,
                                 double a, double b, int n = 257) {
    std::vector<double> xs(static_cast<size_t>(n)), us(static_cast<size_t>(n)),
        dus(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double x = a + (b - a) * i / (n - 1);
      xs[static_cast<size_t>(i)] = x;
      us[static_cast<size_t>(i)] = f(x);
      dus[static_cast<size_t>(i)] = df(x);
    }
    return ProfileC1(std::move(xs), std::move(us), std::move(dus));
  }

  static ProfileC1 constant(double c, double a, double b) {
    return ProfileC1({a, b}, {c, c}, {0.0, 0.0});
  }

  Interval domain() const { return Interval(x_.front(), x_.back()); }
  const std::vector<double>& knots_x() const { return x_; }
  const std::vector<double>& knots_u() const { return u_; }
  const std::vector<double>& knots_du() const { return du_; }

  double eval(double x) const {
    const size_t i = seg(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * u_[i] + (s3 - 2 * s2 + s) * h * du_[i] +
           (-2 * s3 + 3 * s2) * u_[i + 1] + (s3 - s2) * h * du_[i + 1];
  }

  double deriv(double x) const {
    const size_t i = seg(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    return (6 * s * s - 6 * s) * (u_[i] - u_[i + 1]) / h +
           (3 * s * s - 4 * s + 1) * du_[i] + (3 * s * s - 2 * s) * du_[i + 1];
  }

  double operator()(double x) const { return eval(x); }

  /// min/max of the value over the domain (exact via cubic extrema).
  Interval image() const {
    double lo = u_.front(), hi = u_.front();
    for (size_t i = 0; i + 1 < x_.size(); ++i) {
      for (double s : segment_critical_s(i)) {
        const double v = eval_seg(i, s);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      lo = std::min(lo, u_[i + 1]);
      hi = std::max(hi, u_[i + 1]);
    }
    return Interval(lo, hi);
  }

  double sup_norm() const {
    const Interval im = image();
    return std::max(std::abs(im.lo), std::abs(im.hi));
  }

  /// min/max of the derivative over the domain (exact: quadratic per segment).
  double deriv_min() const { return deriv_extreme(false); }
  double deriv_max() const { return deriv_extreme(true); }
  double deriv_sup_norm() const { return std::max(std::abs(deriv_min()), std::abs(deriv_max())); }

  /// sup of the negative / positive part of the derivative.
  double sup_neg_deriv() const { return negative_part(deriv_min()); }
  double sup_pos_deriv() const { return positive_part(deriv_max()); }

  /// Positive and negative variation (sum over monotone runs).
  void variations(double* pos, double* neg) const {
    double p = 0.0, q = 0.0;
    for (size_t i = 0; i + 1 < x_.size(); ++i) {
      double prev_s = 0.0, prev_v = u_[i];
      auto crit = segment_critical_s(i);
      crit.push_back(1.0);
      for (double s : crit) {
        if (s <= prev_s) continue;
        const double v = eval_seg(i, s);
        const double d = v - prev_v;
        (d >= 0 ? p : q) += std::abs(d);
        prev_s = s;
        prev_v = v;
      }
    }
    if (pos) *pos = p;
    if (neg) *neg = q;
  }

  double total_variation() const {
    double p, q;
    variations(&p, &q);
    return p + q;
  }

  ProfileC1 negated() const {
    std::vector<double> us(u_.size()), dus(du_.size());
    for (size_t i = 0; i < u_.size(); ++i) {
      us[i] = -u_[i];
      dus[i] = -du_[i];
    }
    return ProfileC1(x_, std::move(us), std::move(dus));
  }

  /// reflect(p)(x) = p(a + b - x) on the same domain.
  ProfileC1 reflected() const {
    const double a = x_.front(), b = x_.back();
    const size_t n = x_.size();
    std::vector<double> xs(n), us(n), dus(n);
    for (size_t i = 0; i < n; ++i) {
      xs[i] = a + b - x_[n - 1 - i];
      us[i] = u_[n - 1 - i];
      dus[i] = -du_[n - 1 - i];
    }
    return ProfileC1(std::move(xs), std::move(us), std::move(dus));
  }

 private:
  std::vector<double> x_, u_, du_;

  size_t seg(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    size_t i = static_cast<size_t>(it - x_.begin());
    if (i > 0) --i;
    if (i + 1 >= x_.size()) i = x_.size() - 2;
    return i;
  }

  double eval_seg(size_t i, double s) const {
    const double h = x_[i + 1] - x_[i];
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * u_[i] + (s3 - 2 * s2 + s) * h * du_[i] +
           (-2 * s3 + 3 * s2) * u_[i + 1] + (s3 - s2) * h * du_[i + 1];
  }

  // derivative on segment i is A s^2 + B s + C in normalized coordinate
  void deriv_coeffs(size_t i, double* A, double* B, double* C) const {
    const double h = x_[i + 1] - x_[i];
    const double g = (u_[i] - u_[i + 1]) / h;
    *A = 6 * g + 3 * du_[i] + 3 * du_[i + 1];
    *B = -6 * g - 4 * du_[i] - 2 * du_[i + 1];
    *C = du_[i];
  }

  // interior roots of the derivative on segment i (s in (0,1)), ascending
  std::vector<double> segment_critical_s(size_t i) const {
    double A, B, C;
    deriv_coeffs(i, &A, &B, &C);
    std::vector<double> roots;
    if (std::abs(A) < 1e-300) {
      if (std::abs(B) > 1e-300) {
        const double s = -C / B;
        if (s > 0 && s < 1) roots.push_back(s);
      }
    } else {
      const double disc = B * B - 4 * A * C;
      if (disc >= 0) {
        const double sq = std::sqrt(disc);
        for (double s : {(-B - sq) / (2 * A), (-B + sq) / (2 * A)})
          if (s > 0 && s < 1) roots.push_back(s);
      }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
  }

  double deriv_extreme(bool want_max) const {
    double best = du_.front();
    auto upd = [&](double v) { best = want_max ? std::max(best, v) : std::min(best, v); };
    for (size_t i = 0; i + 1 < x_.size(); ++i) {
      double A, B, C;
      deriv_coeffs(i, &A, &B, &C);
      upd(C);              // s = 0
      upd(A + B + C);      // s = 1
      if (std::abs(A) > 1e-300) {
        const double sv = -B / (2 * A);
        if (sv > 0 && sv < 1) upd(A * sv * sv + B * sv + C);
      }
    }
    return best;
  }
};

/// BV profile: ordered C1 pieces on contiguous subintervals, with jumps at
/// the piece boundaries (jump = next piece's left value - previous piece's
/// right value).
class ProfileBV {
 public:
  ProfileBV() = default;
  explicit ProfileBV(std::vector<ProfileC1> pieces) : pieces_(std::move(pieces)) {
    assert(!pieces_.empty());
  }
  explicit ProfileBV(ProfileC1 single) { pieces_.push_back(std::move(single)); }

  const std::vector<ProfileC1>& pieces() const { return pieces_; }

  Interval domain() const {
    return Interval(pieces_.front().domain().lo, pieces_.back().domain().hi);
  }

  /// Left-continuous at interior jump points.
  double eval(double x) const {
    for (size_t i = 0; i < pieces_.size(); ++i) {
      if (x <= pieces_[i].domain().hi || i + 1 == pieces_.size()) return pieces_[i].eval(x);
    }
    return pieces_.back().eval(x);
  }
  double operator()(double x) const { return eval(x); }

  std::vector<double> jump_locations() const {
    std::vector<double> xs;
    for (size_t i = 0; i + 1 < pieces_.size(); ++i) xs.push_back(pieces_[i].domain().hi);
    return xs;
  }

  std::vector<double> jump_sizes() const {
    std::vector<double> js;
    for (size_t i = 0; i + 1 < pieces_.size(); ++i)
      js.push_back(pieces_[i + 1].knots_u().front() - pieces_[i].knots_u().back());
    return js;
  }

  bool has_upward_jump() const {
    for (double j : jump_sizes())
      if (j > 0) return true;
    return false;
  }
  bool has_downward_jump() const {
    for (double j : jump_sizes())
      if (j < 0) return true;
    return false;
  }

  /// sup of the negative part of the lower Dini derivative; +inf at a
  /// downward jump.
  double d_minus() const {
    if (has_downward_jump()) return kInf;
    double m = 0.0;
    for (const auto& p : pieces_) m = std::max(m, p.sup_neg_deriv());
    return m;
  }

  /// sup of the positive part of the upper Dini derivative; +inf at an
  /// upward jump.
  double d_plus() const {
    if (has_upward_jump()) return kInf;
    double m = 0.0;
    for (const auto& p : pieces_) m = std::max(m, p.sup_pos_deriv());
    return m;
  }

  Interval image() const {
    Interval im = pieces_.front().image();
    for (const auto& p : pieces_) {
      const Interval q = p.image();
      im = Interval(std::min(im.lo, q.lo), std::max(im.hi, q.hi));
    }
    return im;
  }

  double sup_norm() const {
    const Interval im = image();
    return std::max(std::abs(im.lo), std::abs(im.hi));
  }

  double total_variation() const {
    double tv = 0.0;
    for (const auto& p : pieces_) tv += p.total_variation();
    for (double j : jump_sizes()) tv += std::abs(j);
    return tv;
  }

  ProfileBV negated() const {
    std::vector<ProfileC1> ps;
    ps.reserve(pieces_.size());
    for (const auto& p : pieces_) ps.push_back(p.negated());
    return ProfileBV(std::move(ps));
  }

  ProfileBV reflected() const {
    std::vector<ProfileC1> ps;
    const double a = domain().lo, b = domain().hi;
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
      ProfileC1 r = it->reflected();
      // shift the reflected piece into place relative to the global domain
      const double lo = a + b - it->domain().hi;
      std::vector<double> xs = r.knots_x();
      const double off = lo - xs.front();
      for (double& x : xs) x += off;
      ps.emplace_back(std::move(xs), r.knots_u(), r.knots_du());
    }
    return ProfileBV(std::move(ps));
  }

 private:
  std::vector<ProfileC1> pieces_;
};

struct VariationReport {
  double tv = 0.0;
  double tv_neg = 0.0;
  double tv_pos = 0.0;
  double sup_norm = 0.0;
};

inline VariationReport variation_report(const ProfileC1& p) {
  VariationReport r;
  p.variations(&r.tv_pos, &r.tv_neg);
  r.tv = r.tv_pos + r.tv_neg;
  r.sup_norm = p.sup_norm();
  return r;
}

inline VariationReport variation_report(const ProfileBV& p) {
  VariationReport r;
  for (const auto& piece : p.pieces()) {
    double pos, neg;
    piece.variations(&pos, &neg);
    r.tv_pos += pos;
    r.tv_neg += neg;
  }
  for (double j : p.jump_sizes()) (j >= 0 ? r.tv_pos : r.tv_neg) += std::abs(j);
  r.tv = r.tv_pos + r.tv_neg;
  r.sup_norm = p.sup_norm();
  return r;
}

enum class SideRule { two_sided, lower_only, upper_only };

/// Whole-line extension of a C1 profile: constant plateaus beyond a margin of
/// width eps1*(b-a) on each side, bridged by cubic Hermite segments whose
/// derivative respects deriv_bound in the mode given by side_rule.
struct ExtendedProfile {
  ProfileC1 full;       // on [a - w, b + w]
  Interval inner;       // [a, b]
  double eps1 = 0.0;
  double alpha_minus = 0.0;
  double alpha_plus = 0.0;

  double margin() const { return eps1 * inner.length(); }

  double eval(double x) const {
    if (x <= full.domain().lo) return alpha_minus;
    if (x >= full.domain().hi) return alpha_plus;
    return full.eval(x);
  }
  double deriv(double x) const {
    if (x <= full.domain().lo || x >= full.domain().hi) return 0.0;
    return full.deriv(x);
  }
  double operator()(double x) const { return eval(x); }
};

namespace detail {

// Exact slope extremes of a cubic Hermite segment of width h from
// (y0, m0) to (y1, m1).
inline void hermite_slope_range(double h, double y0, double m0, double y1, double m1,
                                double* dmin, double* dmax) {
  const double g = (y0 - y1) / h;
  const double A = 6 * g + 3 * m0 + 3 * m1;
  const double B = -6 * g - 4 * m0 - 2 * m1;
  const double C = m0;
  double lo = std::min(C, A + B + C);
  double hi = std::max(C, A + B + C);
  if (std::abs(A) > 1e-300) {
    const double sv = -B / (2 * A);
    if (sv > 0 && sv < 1) {
      const double d = A * sv * sv + B * sv + C;
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
  }
  *dmin = lo;
  *dmax = hi;
}

// Plateau value for a bridge between (alpha, slope 0) and an inner endpoint
// (v, slope m) over width w. `outward_right` flips the monotone-offset sign
// for the right-hand bridge. `values` limits where alpha may sit when it has
// to leave Im(p) (any alpha keeping the extension's image strictly inside
// the state interval is admissible).
inline double plan_bridge(double v, double m, double w, double bound, SideRule rule,
                          Interval img, Interval values, bool outward_right) {
  auto ok = [&](double alpha) {
    double dmin, dmax;
    if (outward_right)
      hermite_slope_range(w, v, m, alpha, 0.0, &dmin, &dmax);
    else
      hermite_slope_range(w, alpha, 0.0, v, m, &dmin, &dmax);
    switch (rule) {
      case SideRule::two_sided:
        return std::max(std::abs(dmin), std::abs(dmax)) <= bound + 1e-12;
      case SideRule::lower_only:
        return dmin >= -bound - 1e-12;
      case SideRule::upper_only:
        return dmax <= bound + 1e-12;
    }
    return false;
  };

  // candidates in preference order: endpoint value (zero offset), the
  // monotone plateau (secant = m/3, Fritsch-Carlson boundary), and the
  // monotone plateau clamped into the admissible value interval
  const double mono = outward_right ? v + w * m / 3.0 : v - w * m / 3.0;
  const Interval room(std::min(values.lo, img.lo), std::max(values.hi, img.hi));
  for (double alpha : {v, img.clamp(mono), room.clamp(mono)})
    if (ok(alpha)) return alpha;
  throw ExtensionInfeasible("bridge slope bound cannot be met within the margin width");
}

}  // namespace detail

inline ExtendedProfile extend_profile(const ProfileC1& p, double eps1, double deriv_bound,
                                      SideRule side_rule,
                                      Interval values = Interval(-kInf, kInf)) {
  if (eps1 <= 0) throw ExtensionInfeasible("eps1 must be positive");
  const Interval dom = p.domain();
  const double a = dom.lo, b = dom.hi;
  const double w = eps1 * (b - a);
  const Interval img = p.image();
  // keep plateaus strictly inside the admissible state interval
  Interval room = values;
  if (values.finite()) {
    const double margin = 1e-3 * std::max(values.length(), 1.0);
    room = Interval(values.lo + margin, values.hi - margin);
  }

  const double alpha_m = detail::plan_bridge(p.eval(a), p.deriv(a), w, deriv_bound,
                                             side_rule, img, room, false);
  const double alpha_p = detail::plan_bridge(p.eval(b), p.deriv(b), w, deriv_bound,
                                             side_rule, img, room, true);

  std::vector<double> xs, us, dus;
  xs.push_back(a - w);
  us.push_back(alpha_m);
  dus.push_back(0.0);
  for (size_t i = 0; i < p.knots_x().size(); ++i) {
    xs.push_back(p.knots_x()[i]);
    us.push_back(p.knots_u()[i]);
    dus.push_back(p.knots_du()[i]);
  }
  xs.push_back(b + w);
  us.push_back(alpha_p);
  dus.push_back(0.0);

  ExtendedProfile ext;
  ext.full = ProfileC1(std::move(xs), std::move(us), std::move(dus));
  ext.inner = dom;
  ext.eps1 = eps1;
  ext.alpha_minus = alpha_m;
  ext.alpha_plus = alpha_p;

  if (ext.full.sup_norm() > 2.0 * p.sup_norm() + 1e-12)
    throw ExtensionInfeasible("extension sup norm exceeds twice the inner sup norm");
  return ext;
}

/// Mollify a BV profile with the standard bump kernel of radius 1/n,
/// preserving the strict one-sided bound: requires sup D+ p < M (no upward
/// jumps, piece slopes < M) and returns a C1 profile with derivative < M.
/// The profile is extended constantly by its one-sided limits outside [a,b].
inline ProfileC1 mollify_one_sided(const ProfileBV& p, double M, int n,
                                   int out_knots = 0) {
  if (p.has_upward_jump())
    throw OneSidedViolation("upward jump: upper Dini derivative is +inf");
  double dmax = -kInf;
  for (const auto& piece : p.pieces()) dmax = std::max(dmax, piece.deriv_max());
  if (dmax >= M)
    throw OneSidedViolation("piece derivative reaches the bound M");

  const Interval dom = p.domain();
  const double r = 1.0 / n;

  // normalized bump kernel on [-1,1]
  static const double bump_mass =
      integrate_gl64([](double t) { return std::exp(-1.0 / (1.0 - t * t)); }, -1.0 + 1e-12,
                     1.0 - 1e-12);
  auto kernel = [&](double y) {
    const double t = y / r;
    if (std::abs(t) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - t * t)) / (bump_mass * r);
  };
  auto kernel_d = [&](double y) {
    const double t = y / r;
    if (std::abs(t) >= 1.0) return 0.0;
    const double q = 1.0 - t * t;
    return std::exp(-1.0 / q) * (-2.0 * t / (q * q)) / (bump_mass * r * r);
  };

  auto p_ext = [&](double x) {
    if (x <= dom.lo) return p.pieces().front().knots_u().front();
    if (x >= dom.hi) return p.pieces().back().knots_u().back();
    return p.eval(x);
  };

  // integration breakpoints: piece knots and jump locations
  std::vector<double> breaks;
  for (const auto& piece : p.pieces())
    for (double x : piece.knots_x()) breaks.push_back(x);

  auto convolve = [&](const std::function<double(double)>& ker, double x) {
    std::vector<double> pts{x - r};
    for (double bp : breaks)
      if (bp > x - r && bp < x + r) pts.push_back(bp);
    pts.push_back(x + r);
    std::sort(pts.begin(), pts.end());
    double sum = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i)
      sum += integrate_gl64([&](double s) { return ker(x - s) * p_ext(s); }, pts[i],
                            pts[i + 1]);
    return sum;
  };

  const int m = out_knots > 0 ? out_knots : std::max(16 * n + 1, 201);
  std::vector<double> xs(static_cast<size_t>(m)), us(static_cast<size_t>(m)),
      dus(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double x = dom.lo + dom.length() * i / (m - 1);
    xs[static_cast<size_t>(i)] = x;
    us[static_cast<size_t>(i)] = convolve(kernel, x);
    dus[static_cast<size_t>(i)] = convolve(kernel_d, x);
  }
  return ProfileC1(std::move(xs), std::move(us), std::move(dus));
}

/// Lower-sided variant for initial data: returns a C1 profile with
/// derivative > -M; requires sup of the negative part of D- p < M
/// (no downward jumps).
inline ProfileC1 mollify_one_sided_lower(const ProfileBV& p, double M, int n,
                                         int out_knots = 0) {
  if (p.has_downward_jump())
    throw OneSidedViolation("downward jump: lower Dini derivative is -inf");
  return mollify_one_sided(p.negated(), M, n, out_knots).negated();
}

/// L1 distance between a BV profile and a C1 profile over the BV domain.
inline double l1_distance(const ProfileBV& p, const ProfileC1& q) {
  std::vector<double> breaks;
  for (const auto& piece : p.pieces())
    for (double x : piece.knots_x()) breaks.push_back(x);
  for (double x : q.knots_x()) breaks.push_back(x);
  const Interval dom = p.domain();
  return integrate_split([&](double x) { return std::abs(p.eval(x) - q.eval(x)); }, dom.lo,
                         dom.hi, breaks, 1e-9);
}

}  // namespace claw
