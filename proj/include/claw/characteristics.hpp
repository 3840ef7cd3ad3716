#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "claw/control.hpp"
#include "claw/errors.hpp"
#include "claw/flux_model.hpp"
#include "claw/interval.hpp"
#include "claw/io_util.hpp"
#include "claw/profile.hpp"
#include "claw/quadrature.hpp"
#include "claw/synthesis.hpp"

namespace claw {

struct ClassicalOptions {
  int fan_points = 801;            // uniform foot points across the window
  int time_steps = 128;            // retained sweep times (blow-up / crossing checks)
  double blowup_threshold = 1e10;  // on |z1|
  std::optional<Interval> window;  // override the automatic window rule
};

/// Classical (broad) solution of u_t + f(u)_x = h(t) by characteristics.
/// Along x'(t) = f'(z0(t)) the value z0(t) = ubar(x0) + H(t) is exact, and the
/// spatial slope obeys the Riccati closed form 1/z1 = 1/ubar'(x0) + ∫f''(z0).
/// Positions and the f'' integral are advanced by adaptive Gauss-Kronrod
/// quadrature; u(t,·) is reconstructed as the cubic Hermite interpolant of the
/// fan points (x(t;x0), z0(t;x0)) with exact slopes z1(t;x0).
class ClassicalSolution {
 public:
  const FluxModel& model() const { return model_; }
  const ExtendedProfile& extended_data() const { return ext_; }
  const ControlSignal& control() const { return h_; }
  double final_time() const { return T_; }
  Interval window() const { return window_; }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& foot_points() const { return x0_; }
  const std::vector<double>& foot_values() const { return u0_; }
  const std::vector<double>& foot_slopes() const { return du0_; }

  double position(std::size_t it, std::size_t j) const { return X_[it][j]; }
  double z0_at(std::size_t it, std::size_t j) const { return u0_[j] + Hs_[it]; }
  double z1_at(std::size_t it, std::size_t j) const {
    return z1_from(du0_[j], I2_[it][j]);
  }
  /// |1/z1| = |1/ubar'(x0) + ∫f''|; +inf on plateau characteristics (z1 ≡ 0).
  double inverse_z1_at(std::size_t it, std::size_t j) const {
    if (du0_[j] == 0.0) return kInf;
    return std::abs(1.0 / du0_[j] + I2_[it][j]);
  }

  /// Reconstructed u(t,·) as a C1 profile with knots at the fan points.
  ProfileC1 profile_at(double t) const {
    const std::size_t it = base_index(t);
    const double H = h_.primitive(t);
    const std::size_t n = x0_.size();
    std::vector<double> xs(n), us(n), dus(n);
    for (std::size_t j = 0; j < n; ++j) {
      double x = X_[it][j];
      double i2 = I2_[it][j];
      if (t > times_[it]) {
        x += flux_deriv_integral(DerivOrder::df, times_[it], t, u0_[j], 1e-12);
        i2 += flux_deriv_integral(DerivOrder::d2f, times_[it], t, u0_[j], 1e-12);
      }
      xs[j] = x;
      us[j] = u0_[j] + H;
      dus[j] = z1_from(du0_[j], i2);
    }
    for (std::size_t j = 0; j + 1 < n; ++j)
      if (!(xs[j + 1] > xs[j]))
        throw StepFailure("characteristic fan collapsed at t=" + std::to_string(t));
    return ProfileC1(std::move(xs), std::move(us), std::move(dus));
  }

  /// u(t,x); throws WindowTooSmall outside the fan coverage at time t.
  double eval(double t, double x) const {
    if (!(cache_valid_ && cache_t_ == t)) {
      cache_profile_ = profile_at(t);
      cache_t_ = t;
      cache_valid_ = true;
    }
    const Interval span = cache_profile_.domain();
    if (x < span.lo || x > span.hi)
      throw WindowTooSmall("query x=" + std::to_string(x) +
                           " outside fan coverage at t=" + std::to_string(t));
    return cache_profile_.eval(x);
  }

  /// Interpolated value at a retained time index (used for boundary traces).
  double value_at_index(std::size_t it, double x) const {
    const std::vector<double>& xs = X_[it];
    if (x < xs.front() || x > xs.back())
      throw WindowTooSmall("trace point outside fan coverage at t=" +
                           std::to_string(times_[it]));
    auto pos = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t j = static_cast<std::size_t>(pos - xs.begin());
    if (j > 0) --j;
    if (j + 1 >= xs.size()) j = xs.size() - 2;
    return hermite(xs[j], z0_at(it, j), z1_at(it, j), xs[j + 1], z0_at(it, j + 1),
                   z1_at(it, j + 1), x);
  }

  /// Strict x0-monotonicity of the fan at every retained time.
  bool non_crossing() const {
    for (const auto& col : X_)
      for (std::size_t j = 0; j + 1 < col.size(); ++j)
        if (!(col[j + 1] > col[j])) return false;
    return true;
  }

  friend ClassicalSolution solve_classical(const FluxModel& model,
                                           const ExtendedProfile& ubar_ext,
                                           const ControlSignal& h, double T,
                                           const ClassicalOptions& opt);

 private:
  ClassicalSolution() = default;

  static double hermite(double x0, double y0, double m0, double x1, double y1, double m1,
                        double x) {
    const double w = x1 - x0;
    const double s = (x - x0) / w;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * w * m0 +
           (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * w * m1;
  }

  double z1_from(double du0, double i2) const {
    if (du0 == 0.0) return 0.0;
    return 1.0 / (1.0 / du0 + i2);
  }

  /// index of the last retained time <= t (t clamped into [0, T]).
  std::size_t base_index(double t) const {
    if (!(t >= -1e-9 && t <= T_ + 1e-9))
      throw DomainError("classical solution queried outside [0, T]");
    auto pos = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t it = static_cast<std::size_t>(pos - times_.begin());
    if (it > 0) --it;
    if (it >= times_.size()) it = times_.size() - 1;
    return it;
  }

  /// ∫_{t0}^{t1} g(z0(τ)) dτ with g = f' or f''; split at control breakpoints.
  double flux_deriv_integral(DerivOrder which, double t0, double t1, double u0,
                             double abs_tol) const {
    if (!(t1 > t0)) return 0.0;
    const auto& g = which == DerivOrder::df ? model_.eval_df : model_.eval_d2f;
    auto integrand = [&](double tau) {
      double z = u0 + h_.primitive(tau);
      z = std::min(std::max(z, model_.domain.lo), model_.domain.hi);
      return g(z);
    };
    return integrate_split(integrand, t0, t1, piece_times_, abs_tol);
  }

  FluxModel model_;
  ExtendedProfile ext_;
  ControlSignal h_;
  double T_ = 0.0;
  double blowup_threshold_ = 1e10;
  Interval window_;
  std::vector<double> piece_times_;
  std::vector<double> x0_, u0_, du0_;
  std::vector<double> times_, Hs_;
  std::vector<std::vector<double>> X_;   // positions per retained time
  std::vector<std::vector<double>> I2_;  // ∫₀ᵗ f''(z0) per retained time

  mutable bool cache_valid_ = false;
  mutable double cache_t_ = 0.0;
  mutable ProfileC1 cache_profile_;
};

inline ClassicalSolution solve_classical(const FluxModel& model,
                                         const ExtendedProfile& ubar_ext,
                                         const ControlSignal& h, double T,
                                         const ClassicalOptions& opt = {}) {
  if (!(T > 0)) throw DomainError("solve_classical: T must be positive");
  if (opt.fan_points < 2 || opt.time_steps < 1)
    throw ConfigError("solve_classical: fan_points >= 2 and time_steps >= 1 required");

  ClassicalSolution sol;
  sol.model_ = model;
  sol.ext_ = ubar_ext;
  sol.h_ = h;
  sol.T_ = T;
  sol.blowup_threshold_ = opt.blowup_threshold;
  for (const ControlPiece& p : h.pieces()) sol.piece_times_.push_back(p.t_lo);
  sol.piece_times_.push_back(h.t_end());

  const Interval inner = ubar_ext.inner;
  if (opt.window) {
    sol.window_ = *opt.window;
  } else {
    // window rule: [a - (||f'|| T + eps1 (b-a) + margin), b + same]
    const Interval U = ubar_ext.full.image();
    const Interval states(std::max(U.lo + h.primitive_min(), model.domain.lo),
                          std::min(U.hi + h.primitive_max(), model.domain.hi));
    if (!(states.lo <= states.hi))
      throw DomainError("solve_classical: state excursion leaves the flux domain");
    const double S = sup_norm_on(model, DerivOrder::df, states);
    const double reach = S * T + ubar_ext.margin();
    const double R = reach + 0.1 * (reach + inner.length()) + 1e-9;
    sol.window_ = Interval(inner.lo - R, inner.hi + R);
  }

  // foot grid: uniform over the window, plus the extension knots so that the
  // Hermite reconstruction reproduces the initial data exactly
  std::vector<double> grid;
  for (int i = 0; i < opt.fan_points; ++i)
    grid.push_back(sol.window_.lo +
                   sol.window_.length() * i / (opt.fan_points - 1));
  for (double x : ubar_ext.full.knots_x())
    if (x > sol.window_.lo && x < sol.window_.hi) grid.push_back(x);
  std::sort(grid.begin(), grid.end());
  for (double x : grid) {
    if (!sol.x0_.empty() && x - sol.x0_.back() <= 1e-12 * (1.0 + std::abs(x))) continue;
    sol.x0_.push_back(x);
    sol.u0_.push_back(ubar_ext.eval(x));
    sol.du0_.push_back(ubar_ext.deriv(x));
  }

  const std::size_t n = sol.x0_.size();
  const int nt = opt.time_steps;
  sol.times_.resize(static_cast<std::size_t>(nt) + 1);
  sol.Hs_.resize(static_cast<std::size_t>(nt) + 1);
  for (int it = 0; it <= nt; ++it) {
    sol.times_[static_cast<std::size_t>(it)] = T * it / nt;
    sol.Hs_[static_cast<std::size_t>(it)] =
        h.primitive(sol.times_[static_cast<std::size_t>(it)]);
  }
  sol.X_.assign(sol.times_.size(), std::vector<double>(n, 0.0));
  sol.I2_.assign(sol.times_.size(), std::vector<double>(n, 0.0));
  sol.X_[0] = sol.x0_;

  const double step_tol = 1e-10 / nt;
  for (int it = 0; it < nt; ++it) {
    const std::size_t i0 = static_cast<std::size_t>(it);
    const double t0 = sol.times_[i0], t1 = sol.times_[i0 + 1];
    for (std::size_t j = 0; j < n; ++j) {
      sol.X_[i0 + 1][j] =
          sol.X_[i0][j] +
          sol.flux_deriv_integral(DerivOrder::df, t0, t1, sol.u0_[j], step_tol);
      sol.I2_[i0 + 1][j] =
          sol.I2_[i0][j] +
          sol.flux_deriv_integral(DerivOrder::d2f, t0, t1, sol.u0_[j], step_tol);
    }
    // Riccati blow-up: 1/z1 = 1/du0 + I2 crossing zero (or |z1| past threshold)
    for (std::size_t j = 0; j < n; ++j) {
      if (sol.du0_[j] == 0.0) continue;
      const double r_old = 1.0 / sol.du0_[j] + sol.I2_[i0][j];
      const double r_new = 1.0 / sol.du0_[j] + sol.I2_[i0 + 1][j];
      if (r_old * r_new < 0.0) {
        const double tb = t0 + (t1 - t0) * r_old / (r_old - r_new);
        throw BlowUp(tb, sol.x0_[j]);
      }
      if (std::abs(r_new) * opt.blowup_threshold < 1.0) throw BlowUp(t1, sol.x0_[j]);
    }
    // fan must keep covering [a,b]
    if (sol.X_[i0 + 1].front() > inner.lo || sol.X_[i0 + 1].back() < inner.hi)
      throw WindowTooSmall("fan no longer covers [a,b] at t=" + std::to_string(t1));
  }
  return sol;
}

enum class TraceSide { left, right };

struct TraceSeries {
  std::vector<double> t;
  std::vector<double> u;
};

/// Boundary trace u(t, a+) or u(t, b-) on the retained time grid.
inline TraceSeries trace(const ClassicalSolution& sol, TraceSide side) {
  const Interval inner = sol.extended_data().inner;
  const double x = side == TraceSide::left ? inner.lo : inner.hi;
  TraceSeries s;
  s.t = sol.times();
  s.u.reserve(s.t.size());
  for (std::size_t it = 0; it < s.t.size(); ++it) s.u.push_back(sol.value_at_index(it, x));
  return s;
}

struct BlowupBoundReport {
  double bound = 0.0;            // analytic lower bound on 1/|z1| for t <= T1
  double min_inverse = kInf;     // measured min of |1/z1| over the fan, t <= T1
  bool two_sided_checked = false;
  bool one_sided_checked = false;
  bool ok = true;
};

/// Checks the Riccati no-blow-up estimates of the synthesis proof against the
/// measured fan: 1/|z1| > (b-a) eps1 ||f''|| / (2 [|f|]) for t <= T1, and the
/// one-sided variant z1 <= max(0, ubar'(x0)) for convex fluxes (mirrored for
/// concave ones). Throws CertificateViolation on failure.
inline BlowupBoundReport verify_no_blowup_bound(const ClassicalSolution& sol,
                                                const SynthesisCertificate& cert) {
  BlowupBoundReport rep;
  const std::vector<double>& ts = sol.times();
  const std::size_t n = sol.foot_points().size();

  if (cert.mode == SelectionMode::full_bound && std::isfinite(cert.bracket_value) &&
      cert.bracket_value > 0.0) {
    rep.two_sided_checked = true;
    rep.bound =
        (cert.b - cert.a) * cert.eps1 * cert.f2_sup / (2.0 * cert.bracket_value);
    for (std::size_t it = 0; it < ts.size() && ts[it] <= cert.T1 + 1e-12; ++it)
      for (std::size_t j = 0; j < n; ++j)
        rep.min_inverse = std::min(rep.min_inverse, sol.inverse_z1_at(it, j));
    if (!(rep.min_inverse > rep.bound)) {
      rep.ok = false;
      throw CertificateViolation("Riccati lower bound on 1/|z1| fails (measured " +
                                 std::to_string(rep.min_inverse) + ", bound " +
                                 std::to_string(rep.bound) + ")");
    }
  }

  const FluxShape shape = sol.model().shape;
  if (shape != FluxShape::general) {
    rep.one_sided_checked = true;
    for (std::size_t it = 0; it < ts.size(); ++it)
      for (std::size_t j = 0; j < n; ++j) {
        const double z1 = sol.z1_at(it, j);
        const double d0 = sol.foot_slopes()[j];
        const double tol = 1e-9 * (1.0 + std::abs(d0));
        const bool bad = shape == FluxShape::convex ? z1 > std::max(0.0, d0) + tol
                                                    : z1 < std::min(0.0, d0) - tol;
        if (bad) {
          rep.ok = false;
          throw CertificateViolation(
              "one-sided Riccati estimate fails at t=" + std::to_string(ts[it]) +
              ", x0=" + std::to_string(sol.foot_points()[j]));
        }
      }
  }
  return rep;
}

/// CSV snapshot dump: columns t,x,u over a uniform grid on [a,b] at the
/// requested times. Atomic write.
inline void write_snapshot_csv(const ClassicalSolution& sol,
                               const std::vector<double>& times, int n_points,
                               const std::string& path) {
  if (n_points < 2) throw ConfigError("snapshot CSV needs at least 2 sample points");
  std::ostringstream out;
  out.precision(17);
  out << "t,x,u\n";
  const Interval inner = sol.extended_data().inner;
  for (double t : times) {
    const ProfileC1 p = sol.profile_at(t);
    for (int i = 0; i < n_points; ++i) {
      const double x = inner.lo + inner.length() * i / (n_points - 1);
      out << t << ',' << x << ',' << p.eval(x) << '\n';
    }
  }
  write_file_atomic(path, out.str());
}

/// CSV fan dump: columns x0,t,x,z0,z1 over the retained grid (with optional
/// strides). Atomic write.
inline void write_fan_csv(const ClassicalSolution& sol, const std::string& path,
                          std::size_t time_stride = 1, std::size_t fan_stride = 1) {
  if (time_stride == 0 || fan_stride == 0)
    throw ConfigError("fan CSV strides must be positive");
  std::ostringstream out;
  out.precision(17);
  out << "x0,t,x,z0,z1\n";
  for (std::size_t j = 0; j < sol.foot_points().size(); j += fan_stride)
    for (std::size_t it = 0; it < sol.times().size(); it += time_stride)
      out << sol.foot_points()[j] << ',' << sol.times()[it] << ','
          << sol.position(it, j) << ',' << sol.z0_at(it, j) << ','
          << sol.z1_at(it, j) << '\n';
  write_file_atomic(path, out.str());
}

}  // namespace claw
