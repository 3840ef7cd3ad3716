#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "claw/errors.hpp"

namespace claw {

/// One affine piece of a control signal: h(t) = c0 + c1*(t - t_lo) on [t_lo, t_hi].
struct ControlPiece {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double c0 = 0.0;
  double c1 = 0.0;

  double eval(double t) const { return c0 + c1 * (t - t_lo); }
  double value_hi() const { return c0 + c1 * (t_hi - t_lo); }
  /// Exact integral of h over [t_lo, t].
  double integral_to(double t) const {
    const double s = t - t_lo;
    return c0 * s + 0.5 * c1 * s * s;
  }
  double area() const { return integral_to(t_hi); }
};

/// Piecewise-affine control h(t) on [0, T] with exact primitive H(t) = ∫₀ᵗ h,
/// exact total variation, and exact sup-norm. Immutable after construction.
class ControlSignal {
 public:
  ControlSignal() = default;

  explicit ControlSignal(std::vector<ControlPiece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw ConfigError("control signal needs at least one piece");
    validate();
    build_cache();
  }

  const std::vector<ControlPiece>& pieces() const { return pieces_; }
  double t_begin() const { return pieces_.front().t_lo; }
  double t_end() const { return pieces_.back().t_hi; }
  double duration() const { return t_end() - t_begin(); }

  /// h(t); clamped to [t_begin, t_end], left-closed pieces.
  double eval(double t) const {
    const ControlPiece& p = pieces_[locate(t)];
    return p.eval(std::min(std::max(t, p.t_lo), p.t_hi));
  }

  /// H(t) = ∫_{t_begin}^{t} h(s) ds, exact piecewise quadratic.
  double primitive(double t) const {
    if (t <= t_begin()) return 0.0;
    if (t >= t_end()) return prefix_.back() + pieces_.back().area();
    const std::size_t i = locate(t);
    return prefix_[i] + pieces_[i].integral_to(t);
  }

  /// ∫ over the whole support.
  double total_integral() const { return prefix_.back() + pieces_.back().area(); }

  double sup_norm() const { return sup_norm_; }
  double total_variation() const { return total_variation_; }
  /// max_t |H(t)|, exact (quadratic extrema per piece).
  double primitive_sup() const { return primitive_sup_; }
  /// exact range of H over the support (includes H(t_begin) = 0).
  double primitive_min() const { return primitive_min_; }
  double primitive_max() const { return primitive_max_; }

  /// -h(t), same partition.
  ControlSignal negated() const {
    std::vector<ControlPiece> out = pieces_;
    for (ControlPiece& p : out) {
      p.c0 = -p.c0;
      p.c1 = -p.c1;
    }
    return ControlSignal(std::move(out));
  }

  /// t ↦ h(t + shift) re-anchored so the signal starts `shift` earlier;
  /// i.e. piece times are translated by `shift`.
  ControlSignal shifted(double shift) const {
    std::vector<ControlPiece> out = pieces_;
    for (ControlPiece& p : out) {
      p.t_lo += shift;
      p.t_hi += shift;
    }
    return ControlSignal(std::move(out));
  }

  /// Time reversal about t_total: r(t) = h(t_total - t), defined on
  /// [t_total - t_end, t_total - t_begin].
  ControlSignal reversed(double t_total) const {
    std::vector<ControlPiece> out;
    out.reserve(pieces_.size());
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
      ControlPiece q;
      q.t_lo = t_total - it->t_hi;
      q.t_hi = t_total - it->t_lo;
      q.c0 = it->value_hi();
      q.c1 = -it->c1;
      out.push_back(q);
    }
    return ControlSignal(std::move(out));
  }

  /// Concatenation; other must start where this ends (≤ 1e-9 in time) and the
  /// junction values must agree within the continuity tolerance.
  ControlSignal concat(const ControlSignal& other) const {
    if (std::abs(other.t_begin() - t_end()) > 1e-9)
      throw ConfigError("control concat: time ranges do not abut");
    std::vector<ControlPiece> out = pieces_;
    for (ControlPiece p : other.pieces_) {
      // Re-anchor exactly onto this signal's end time to avoid drift.
      const double d = t_end() - other.t_begin();
      p.t_lo += d;
      p.t_hi += d;
      out.push_back(p);
    }
    return ControlSignal(std::move(out));
  }

  static constexpr double kContinuityTol = 1e-12;

 private:
  void validate() const {
    // continuity is judged relative to the signal's global magnitude: a ramp
    // of height M down to zero closes only to within O(M eps) in floating point
    double scale = 1.0;
    for (const ControlPiece& p : pieces_)
      scale = std::max({scale, std::abs(p.c0), std::abs(p.value_hi())});
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const ControlPiece& p = pieces_[i];
      if (!(p.t_hi >= p.t_lo)) throw ConfigError("control piece with t_hi < t_lo");
      if (i > 0) {
        const ControlPiece& q = pieces_[i - 1];
        if (std::abs(p.t_lo - q.t_hi) > 1e-9)
          throw ConfigError("control pieces are not contiguous in time");
        if (std::abs(p.c0 - q.value_hi()) > kContinuityTol * scale)
          throw ConfigError("control signal discontinuous across pieces");
      }
    }
  }

  void build_cache() {
    prefix_.assign(pieces_.size(), 0.0);
    double acc = 0.0;
    double sup = 0.0;
    double tv = 0.0;
    double hmin = 0.0;
    double hmax = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const ControlPiece& p = pieces_[i];
      prefix_[i] = acc;
      const double v0 = p.c0;
      const double v1 = p.value_hi();
      sup = std::max(sup, std::max(std::abs(v0), std::abs(v1)));
      tv += std::abs(v1 - v0);
      // Primitive on this piece is quadratic; extremum where h = 0.
      hmin = std::min(hmin, acc + p.area());
      hmax = std::max(hmax, acc + p.area());
      if (p.c1 != 0.0) {
        const double ts = p.t_lo - p.c0 / p.c1;
        if (ts > p.t_lo && ts < p.t_hi) {
          const double hs = acc + p.integral_to(ts);
          hmin = std::min(hmin, hs);
          hmax = std::max(hmax, hs);
        }
      }
      acc += p.area();
    }
    sup_norm_ = sup;
    total_variation_ = tv;
    primitive_min_ = hmin;
    primitive_max_ = hmax;
    primitive_sup_ = std::max(std::abs(hmin), std::abs(hmax));
  }

  std::size_t locate(double t) const {
    if (t <= pieces_.front().t_hi) return 0;
    // Binary search for the piece with t_lo <= t.
    std::size_t lo = 0, hi = pieces_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (pieces_[mid].t_lo <= t)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

  std::vector<ControlPiece> pieces_;
  std::vector<double> prefix_;  // H at each piece start
  double sup_norm_ = 0.0;
  double total_variation_ = 0.0;
  double primitive_sup_ = 0.0;
  double primitive_min_ = 0.0;
  double primitive_max_ = 0.0;
};

/// Constant-zero control on [0, T].
inline ControlSignal zero_control(double T) {
  return ControlSignal({ControlPiece{0.0, T, 0.0, 0.0}});
}

}  // namespace claw
