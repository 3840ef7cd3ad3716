#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "claw/control.hpp"
#include "claw/errors.hpp"
#include "claw/flux_model.hpp"
#include "claw/interval.hpp"
#include "claw/io_util.hpp"
#include "claw/optimize.hpp"
#include "claw/profile.hpp"
#include "claw/quadrature.hpp"

namespace claw {

struct FVOptions {
  double cfl = 0.45;               // must stay <= 0.5
  std::optional<Interval> window;  // override the automatic window rule
  std::vector<double> snapshot_times;  // t = 0 and t = T are always retained
  std::vector<double> entropy_ks;      // Kruzhkov constants tracked during the run
  int entropy_stride = 1;              // check the entropy residual every n-th step
};

struct FVSnapshot {
  double t = 0.0;
  std::vector<double> u;
};

/// Initial-data description for the FV solver: sampler, far-field plateau
/// values (used for ghost cells), the physical interval [a,b], the data image
/// (for the window rule) and an extra padding width.
struct FVProblem {
  std::function<double(double)> u0;
  double far_left = 0.0;
  double far_right = 0.0;
  Interval inner;
  Interval image;
  double pad = 0.0;
};

inline FVProblem make_fv_problem(const ExtendedProfile& ext) {
  FVProblem p;
  p.u0 = [ext](double x) { return ext.eval(x); };
  p.far_left = ext.alpha_minus;
  p.far_right = ext.alpha_plus;
  p.inner = ext.inner;
  p.image = ext.full.image();
  p.pad = ext.margin();
  return p;
}

inline FVProblem make_fv_problem(const ProfileBV& bv) {
  FVProblem p;
  p.u0 = [bv](double x) { return bv.eval(x); };
  p.far_left = bv.pieces().front().knots_u().front();
  p.far_right = bv.pieces().back().knots_u().back();
  p.inner = bv.domain();
  p.image = bv.image();
  return p;
}

/// Result of an FV run: final state, retained snapshots and the per-step
/// diagnostic ledgers (dt, TV, conservation, entropy residuals).
struct FVRun {
  double T = 0.0;
  double dx = 0.0;
  double cfl = 0.0;
  Interval window;
  Interval inner;
  double far_left = 0.0, far_right = 0.0;

  std::vector<double> u_final;         // cell averages at t = T
  std::vector<FVSnapshot> snapshots;   // includes t = 0 and t = T
  std::vector<double> dt_history;
  std::vector<double> tv_history;      // TV after each hyperbolic sub-step
  double max_tv_increase = 0.0;        // worst TV growth across a hyperbolic step
  double max_conservation_defect = 0.0;  // mass balance telescoping error
  std::vector<double> entropy_ks;
  std::vector<double> entropy_violation;  // max positive residual per k

  double cell_center(std::size_t i) const { return window.lo + (i + 0.5) * dx; }
  std::size_t cells() const { return u_final.size(); }

  const FVSnapshot& snapshot_near(double t) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < snapshots.size(); ++i)
      if (std::abs(snapshots[i].t - t) < std::abs(snapshots[best].t - t)) best = i;
    return snapshots[best];
  }

  /// L1 distance over `seg` between a stored layer and a reference function,
  /// evaluated at cell centers (first-order consistent with the scheme).
  double l1_against(const std::vector<double>& u,
                    const std::function<double(double)>& ref, Interval seg) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double x = cell_center(i);
      if (x < seg.lo || x > seg.hi) continue;
      s += std::abs(u[i] - ref(x)) * dx;
    }
    return s;
  }
};

enum class EntropyFamily { kruzhkov_k };

namespace detail {

/// Entropy-consistent numerical flux factory: exact Godunov min/max formula
/// for convex/concave fluxes, Engquist-Osher (via a tabulated primitive of
/// |f'|) for general shapes.
inline std::function<double(double, double)> make_numerical_flux(const FluxModel& model,
                                                                 Interval work) {
  auto fv = [model](double u) { return model.f(model.domain.clamp(u)); };
  if (model.shape == FluxShape::convex) {
    const double ustar =
        grid_max([&](double u) { return -fv(u); }, work.lo, work.hi, 2048, 6, 1e-13).arg;
    return [fv, ustar](double ul, double ur) {
      if (ul <= ur) return fv(std::min(std::max(ustar, ul), ur));
      return std::max(fv(ul), fv(ur));
    };
  }
  if (model.shape == FluxShape::concave) {
    const double uhat =
        grid_max([&](double u) { return fv(u); }, work.lo, work.hi, 2048, 6, 1e-13).arg;
    return [fv, uhat](double ul, double ur) {
      if (ul <= ur) return std::min(fv(ul), fv(ur));
      return fv(std::min(std::max(uhat, ur), ul));
    };
  }
  // Engquist-Osher: F(ul,ur) = (f(ul)+f(ur))/2 - (Phi(ur)-Phi(ul))/2 with
  // Phi(u) = ∫ |f'|; Phi tabulated once as a cubic Hermite with exact slopes.
  auto table = std::make_shared<CubicTable>();
  const int n = 4097;
  table->x.resize(n);
  table->y.resize(n);
  table->d.resize(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = work.lo + work.length() * i / (n - 1);
    table->x[static_cast<std::size_t>(i)] = u;
    if (i > 0)
      acc += integrate(
          [&](double s) { return std::abs(model.df(model.domain.clamp(s))); },
          table->x[static_cast<std::size_t>(i - 1)], u, 1e-13);
    table->y[static_cast<std::size_t>(i)] = acc;
    table->d[static_cast<std::size_t>(i)] = std::abs(model.df(model.domain.clamp(u)));
  }
  return [fv, table](double ul, double ur) {
    return 0.5 * (fv(ul) + fv(ur)) - 0.5 * (table->eval(ur) - table->eval(ul));
  };
}

}  // namespace detail

/// Godunov / Engquist-Osher finite-volume solve of u_t + f(u)_x = h(t) with
/// Lie splitting: hyperbolic update under CFL <= 0.5, then the exact source
/// shift u += H(t+dt) - H(t) in every cell (exact since h is x-independent).
inline FVRun solve_fv(const FluxModel& model, const FVProblem& prob, const ControlSignal& h,
                      double T, double dx, const FVOptions& opt = {}) {
  if (!(T > 0)) throw DomainError("solve_fv: T must be positive");
  if (!(dx > 0)) throw ConfigError("solve_fv: dx must be positive");
  if (!(opt.cfl > 0.0 && opt.cfl <= 0.5))
    throw ConfigError("solve_fv: CFL number must lie in (0, 0.5]");
  if (opt.entropy_stride < 1) throw ConfigError("solve_fv: entropy_stride >= 1 required");

  FVRun run;
  run.T = T;
  run.dx = dx;
  run.cfl = opt.cfl;
  run.inner = prob.inner;
  run.far_left = prob.far_left;
  run.far_right = prob.far_right;
  run.entropy_ks = opt.entropy_ks;
  run.entropy_violation.assign(opt.entropy_ks.size(), 0.0);

  // window rule (same as the characteristics solver)
  Interval window;
  if (opt.window) {
    window = *opt.window;
  } else {
    const Interval states(
        std::max(prob.image.lo + h.primitive_min(), model.domain.lo),
        std::min(prob.image.hi + h.primitive_max(), model.domain.hi));
    if (!(states.lo <= states.hi))
      throw DomainError("solve_fv: state excursion leaves the flux domain");
    const double S = sup_norm_on(model, DerivOrder::df, states);
    const double reach = S * T + prob.pad;
    const double R = reach + 0.1 * (reach + prob.inner.length()) + 1e-9;
    window = Interval(prob.inner.lo - R, prob.inner.hi + R);
  }
  const std::size_t N = static_cast<std::size_t>(std::ceil(window.length() / dx));
  window = Interval(window.lo, window.lo + static_cast<double>(N) * dx);
  run.window = window;

  std::vector<double> u(N);
  for (std::size_t i = 0; i < N; ++i) u[i] = prob.u0(window.lo + (i + 0.5) * dx);

  // working state range for flux setup: data + source excursion + entropy ks
  double wlo = prob.image.lo + std::min(0.0, h.primitive_min());
  double whi = prob.image.hi + std::max(0.0, h.primitive_max());
  for (double k : opt.entropy_ks) {
    wlo = std::min(wlo, k);
    whi = std::max(whi, k);
  }
  const double wpad = 0.05 * (whi - wlo) + 1e-6;
  const Interval work(std::max(model.domain.lo, wlo - wpad),
                      std::min(model.domain.hi, whi + wpad));
  const auto F = detail::make_numerical_flux(model, work);

  auto tv_of = [&](const std::vector<double>& v, double gl, double gr) {
    double tv = std::abs(v.front() - gl) + std::abs(gr - v.back());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) tv += std::abs(v[i + 1] - v[i]);
    return tv;
  };
  auto mass_of = [&](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m * dx;
  };

  // pending snapshot times (strictly inside (0, T)); t=0 and t=T are implicit
  std::vector<double> pending = opt.snapshot_times;
  std::sort(pending.begin(), pending.end());
  pending.erase(std::remove_if(pending.begin(), pending.end(),
                               [&](double t) { return t <= 1e-14 || t >= T - 1e-14; }),
                pending.end());

  run.snapshots.push_back({0.0, u});
  const double mass0 = mass_of(u);
  const double win_len = window.length();
  double flux_ledger = 0.0;  // ∫ (F_right - F_left) dt

  std::vector<double> flux(N + 1), unew(N), Q(N + 1);
  double t = 0.0;
  long step = 0;
  const double tv_scale = std::max(1.0, tv_of(u, prob.far_left, prob.far_right));
  while (t < T - 1e-13) {
    const double H = h.primitive(t);
    const double gl = prob.far_left + H;
    const double gr = prob.far_right + H;

    double smax = std::max(std::abs(model.df(model.domain.clamp(gl))),
                           std::abs(model.df(model.domain.clamp(gr))));
    for (double v : u) smax = std::max(smax, std::abs(model.df(model.domain.clamp(v))));
    double dt = smax > 0.0 ? opt.cfl * dx / smax : T - t;
    dt = std::min(dt, T - t);
    for (double ts : pending)
      if (ts > t + 1e-13) {
        dt = std::min(dt, ts - t);
        break;
      }
    if (!(dt > 1e-14)) throw StepFailure("dt underflow at t=" + std::to_string(t));

    for (std::size_t i = 0; i <= N; ++i) {
      const double vl = i == 0 ? gl : u[i - 1];
      const double vr = i == N ? gr : u[i];
      flux[i] = F(vl, vr);
    }
    const double lam = dt / dx;
    for (std::size_t i = 0; i < N; ++i) unew[i] = u[i] - lam * (flux[i + 1] - flux[i]);

    // discrete Kruzhkov entropy residual (hyperbolic sub-step)
    if (!opt.entropy_ks.empty() && step % opt.entropy_stride == 0) {
      for (std::size_t ki = 0; ki < opt.entropy_ks.size(); ++ki) {
        const double k = opt.entropy_ks[ki];
        for (std::size_t i = 0; i <= N; ++i) {
          const double vl = i == 0 ? gl : u[i - 1];
          const double vr = i == N ? gr : u[i];
          Q[i] = F(std::max(vl, k), std::max(vr, k)) - F(std::min(vl, k), std::min(vr, k));
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
          const double res = std::abs(unew[i] - k) - std::abs(u[i] - k) +
                             lam * (Q[i + 1] - Q[i]);
          worst = std::max(worst, res);
        }
        run.entropy_violation[ki] = std::max(run.entropy_violation[ki], worst);
      }
    }

    const double tv_before = tv_of(u, gl, gr);
    const double tv_after = tv_of(unew, gl, gr);
    run.max_tv_increase = std::max(run.max_tv_increase, tv_after - tv_before);

    flux_ledger += dt * (flux[N] - flux[0]);
    u.swap(unew);

    // exact source shift (spatially constant, hence exact for cell averages)
    const double shift = h.primitive(t + dt) - H;
    for (double& v : u) v += shift;

    t += dt;
    ++step;
    run.dt_history.push_back(dt);
    run.tv_history.push_back(tv_after);

    // conservation telescoping with the source accounted exactly
    const double defect =
        std::abs(mass_of(u) - mass0 - win_len * h.primitive(t) + flux_ledger);
    run.max_conservation_defect = std::max(run.max_conservation_defect, defect);

    // nontrivial data must not reach the window edges
    const double Hnow = h.primitive(t);
    if (std::abs(u.front() - (prob.far_left + Hnow)) > 1e-6 * tv_scale ||
        std::abs(u.back() - (prob.far_right + Hnow)) > 1e-6 * tv_scale)
      throw WindowTooSmall("FV data reached the window edge at t=" + std::to_string(t));

    if (!pending.empty() && t >= pending.front() - 1e-13) {
      run.snapshots.push_back({t, u});
      pending.erase(pending.begin());
    }
  }

  run.snapshots.push_back({T, u});
  run.u_final = std::move(u);
  return run;
}

inline FVRun solve_fv(const FluxModel& model, const ExtendedProfile& ext,
                      const ControlSignal& h, double T, double dx,
                      const FVOptions& opt = {}) {
  return solve_fv(model, make_fv_problem(ext), h, T, dx, opt);
}

inline FVRun solve_fv(const FluxModel& model, const ProfileBV& bv, const ControlSignal& h,
                      double T, double dx, const FVOptions& opt = {}) {
  return solve_fv(model, make_fv_problem(bv), h, T, dx, opt);
}

/// Max positive discrete Kruzhkov residual over the requested constants; the
/// constants must have been tracked during the run (FVOptions::entropy_ks).
inline double discrete_entropy_check(const FVRun& run, EntropyFamily family,
                                     const std::vector<double>& sample_k) {
  if (family != EntropyFamily::kruzhkov_k)
    throw ConfigError("unknown entropy family");
  double worst = 0.0;
  for (double k : sample_k) {
    bool found = false;
    for (std::size_t i = 0; i < run.entropy_ks.size(); ++i)
      if (std::abs(run.entropy_ks[i] - k) <= 1e-12) {
        worst = std::max(worst, run.entropy_violation[i]);
        found = true;
        break;
      }
    if (!found)
      throw ConfigError("entropy constant k=" + std::to_string(k) +
                        " was not tracked during the run");
  }
  return worst;
}

/// L1([a,b]) distance between the terminal FV state and a target profile.
inline double verify_terminal(const FVRun& run, const std::function<double(double)>& psi) {
  return run.l1_against(run.u_final, psi, run.inner);
}

inline double verify_terminal(const FVRun& run, const ProfileBV& psi) {
  return verify_terminal(run, [&psi](double x) { return psi.eval(x); });
}

inline double verify_terminal(const FVRun& run, const ProfileC1& psi) {
  return verify_terminal(run, [&psi](double x) { return psi.eval(x); });
}

/// CSV snapshot dump: columns t,x,u restricted to [a,b], one block per
/// retained snapshot. Atomic write.
inline void write_fv_snapshot_csv(const FVRun& run, const std::string& path) {
  std::ostringstream out;
  out.precision(17);
  out << "t,x,u\n";
  for (const FVSnapshot& s : run.snapshots)
    for (std::size_t i = 0; i < s.u.size(); ++i) {
      const double x = run.cell_center(i);
      if (x < run.inner.lo || x > run.inner.hi) continue;
      out << s.t << ',' << x << ',' << s.u[i] << '\n';
    }
  write_file_atomic(path, out.str());
}

}  // namespace claw
