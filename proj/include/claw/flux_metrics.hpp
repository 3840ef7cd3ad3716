#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "claw/errors.hpp"
#include "claw/flux_model.hpp"
#include "claw/interval.hpp"
#include "claw/optimize.hpp"
#include "claw/profile.hpp"

namespace claw {

enum class ShiftDirection { k_nonneg, k_nonpos };

inline const char* to_string(ShiftDirection d) {
  return d == ShiftDirection::k_nonneg ? "k_nonneg" : "k_nonpos";
}

struct MetricReport {
  double value = 0.0;      // [|f|]_{J'} (kInf when flagged unbounded)
  double k_witness = 0.0;  // maximizing shift
  ShiftDirection direction = ShiftDirection::k_nonneg;
  double epsilon = 0.0;    // tolerance used
  double argsup_k = 0.0;   // extremal qualifying shift of the winning branch
  bool tie = false;        // both branches attain the sup within tolerance
  bool unbounded = false;  // admissible k range unbounded and inf|Delta| grows
};

/// Difference quotient (f(u+k) - f(u))/k.
inline double delta_f(const FluxModel& model, double u, double k) {
  if (k == 0.0) throw ZeroShift("delta_f: k must be nonzero (use f' as the limit)");
  if (!model.domain.contains(u) || !model.domain.contains(u + k))
    throw DomainError("delta_f: u or u+k outside flux domain");
  return (model.f(u + k) - model.f(u)) / k;
}

namespace detail {

// Delta extended continuously by f' at k = 0. Below the cancellation
// threshold the quotient is evaluated as the midpoint derivative
// f'(u + k/2), which matches Delta to O(k^2).
inline double delta_ext(const FluxModel& model, double u, double k) {
  if (std::abs(k) < 1e-6) return model.df(u + 0.5 * k);
  return (model.f(u + k) - model.f(u)) / k;
}

// inf over u in Jp of |Delta f(u;k)|
inline double inf_abs_delta(const FluxModel& model, Interval Jp, double k, int n) {
  if (Jp.length() == 0.0) return std::abs(delta_ext(model, Jp.lo, k));
  auto neg = [&](double u) { return -std::abs(delta_ext(model, u, k)); };
  return -grid_max(neg, Jp.lo, Jp.hi, n, 4, 1e-12).value;
}

struct BranchResult {
  double value = -kInf;
  double k = 0.0;
  bool unbounded = false;
};

// One branch of the sup-inf. sign = +1 for k >= 0, -1 for k <= 0.
// kcap = sup of admissible |k| (may be +inf).
inline BranchResult branch_sup(const FluxModel& model, Interval Jp, int sign, double kcap,
                               int nk, int nu, double tol) {
  BranchResult best;
  auto q = [&](double k) { return inf_abs_delta(model, Jp, sign * k, nu); };

  best.value = q(0.0);
  best.k = 0.0;

  if (kcap <= 0.0) return best;

  if (!std::isfinite(kcap)) {
    // geometric probe; flag +inf past the overflow guard
    const double unit = std::max(1.0, Jp.length());
    double prev = best.value;
    for (int j = -20; j <= 60; ++j) {
      const double k = unit * std::ldexp(1.0, j);
      const double v = q(k);
      if (v > best.value) {
        best.value = v;
        best.k = sign * k;
      }
      if (v > 1e12) {
        best.unbounded = true;
        best.value = kInf;
        return best;
      }
      prev = v;
    }
    (void)prev;
    return best;
  }

  // cubic-densified grid near k = 0, then golden refinement in t-space
  auto kof = [&](double t) { return kcap * t * t * t; };
  double tbest = 0.0;
  const int n = nk;
  for (int i = 1; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    const double v = q(kof(t));
    if (v > best.value) {
      best.value = v;
      best.k = sign * kof(t);
      tbest = t;
    }
  }
  const double dt = 1.5 / (n - 1);
  const double t0 = std::max(0.0, tbest - dt), t1 = std::min(1.0, tbest + dt);
  const double tr = golden_section_max([&](double t) { return q(kof(t)); }, t0, t1,
                                       std::min(tol, 1e-8));
  const double vr = q(kof(tr));
  if (vr > best.value) {
    best.value = vr;
    best.k = sign * kof(tr);
  }
  return best;
}

}  // namespace detail

inline double argsup_k(const FluxModel& model, Interval Jp, double eps);

/// [|f|]_{J'} = sup over admissible shifts k (J'+k inside the domain) of the
/// inf over u in J' of |Delta f(u;k)|, with the k->0 limit contributing
/// inf |f'|. Nested grids (outer k, inner u) with golden refinement.
inline MetricReport bracket_norm(const FluxModel& model, Interval Jp, double tol = 1e-6,
                                 int nk = 2048, int nu = 2048) {
  if (!model.domain.contains(Jp)) throw DomainError("bracket_norm: J' not inside domain");
  if (!Jp.finite()) throw DomainError("bracket_norm: J' must be finite");

  const double kcap_pos = model.domain.hi - Jp.hi;  // may be +inf
  const double kcap_neg = Jp.lo - model.domain.lo;  // may be +inf

  const auto pos = detail::branch_sup(model, Jp, +1, kcap_pos, nk, nu, tol);
  const auto neg = detail::branch_sup(model, Jp, -1, kcap_neg, nk, nu, tol);

  MetricReport r;
  r.epsilon = tol;
  const double margin = std::max(10.0 * tol, 1e-9);
  if (pos.unbounded || neg.unbounded) {
    r.unbounded = true;
    r.value = kInf;
    r.direction = pos.unbounded ? ShiftDirection::k_nonneg : ShiftDirection::k_nonpos;
    r.k_witness = pos.unbounded ? pos.k : neg.k;
    r.tie = pos.unbounded && neg.unbounded;
    return r;
  }
  if (std::abs(pos.value - neg.value) <= margin) {
    r.tie = pos.k != neg.k;  // both branches attain the sup
    r.value = std::max(pos.value, neg.value);
    r.direction = ShiftDirection::k_nonneg;
    r.k_witness = pos.k;
  } else if (pos.value > neg.value) {
    r.value = pos.value;
    r.direction = ShiftDirection::k_nonneg;
    r.k_witness = pos.k;
  } else {
    r.value = neg.value;
    r.direction = ShiftDirection::k_nonpos;
    r.k_witness = neg.k;
  }
  try {
    r.argsup_k = argsup_k(model, Jp, std::max(100.0 * tol, 1e-6));
  } catch (const BranchUndetermined&) {
    r.argsup_k = r.k_witness;  // auxiliary field; keep the witness as fallback
  }
  return r;
}

/// Extremal shift of the winning branch whose inf |Delta| stays within eps of
/// the sup: infimum of the qualifying set on the k >= 0 branch, supremum on
/// the k <= 0 branch.
inline double argsup_k(const FluxModel& model, Interval Jp, double eps) {
  if (eps <= 0) throw ConfigError("argsup_k: eps must be positive");

  const double kcap_pos = model.domain.hi - Jp.hi;
  const double kcap_neg = Jp.lo - model.domain.lo;
  const int nu = 2048;
  const auto pos = detail::branch_sup(model, Jp, +1, kcap_pos, 2048, nu, 1e-6);
  const auto neg = detail::branch_sup(model, Jp, -1, kcap_neg, 2048, nu, 1e-6);
  if (pos.unbounded || neg.unbounded)
    throw UnboundedNorm("argsup_k: bracket norm is not finite");

  const bool use_pos = pos.value >= neg.value - std::max(10.0 * 1e-6, 1e-9);
  const double V = use_pos ? pos.value : neg.value;
  const int sign = use_pos ? +1 : -1;
  const double kcap = use_pos ? kcap_pos : kcap_neg;
  auto q = [&](double k) { return detail::inf_abs_delta(model, Jp, sign * k, nu); };

  if (q(0.0) > V - eps) return 0.0;
  if (!std::isfinite(kcap)) throw UnboundedNorm("argsup_k: unbounded admissible range");

  // ascending scan in |k| for the first qualifying shift, then bisection
  const int n = 4096;
  auto kof = [&](double t) { return kcap * t * t * t; };
  double lo_t = 0.0, hi_t = -1.0;
  for (int i = 1; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    if (q(kof(t)) > V - eps) {
      hi_t = t;
      break;
    }
    lo_t = t;
  }
  if (hi_t < 0) throw BranchUndetermined("no shift attains the sup within eps");
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo_t + hi_t);
    (q(kof(mid)) > V - eps ? hi_t : lo_t) = mid;
    if ((hi_t - lo_t) * kcap < 1e-12) break;
  }
  return sign * kof(hi_t);
}

/// Bracket norm over the domain truncated in the H2 growth direction:
/// k >= 0 over (i_-, u0) for H2(ii), k <= 0 over (u0, i_+) for H2(iii).
inline MetricReport bracket_norm_truncated(const FluxModel& model, Interval Jp, double u0,
                                           ShiftDirection dir, double tol = 1e-6,
                                           int nk = 2048, int nu = 2048) {
  if (!model.domain.contains(Jp)) throw DomainError("bracket_norm_truncated: J' outside domain");
  MetricReport r;
  r.epsilon = tol;
  r.direction = dir;
  if (dir == ShiftDirection::k_nonneg) {
    if (!(Jp.hi < u0)) throw DomainError("bracket_norm_truncated: J' not below u0");
    const double kcap = std::min(u0, model.domain.hi) - Jp.hi;
    const auto b = detail::branch_sup(model, Jp, +1, kcap, nk, nu, tol);
    r.value = b.value;
    r.k_witness = b.k;
    r.unbounded = b.unbounded;
  } else {
    if (!(Jp.lo > u0)) throw DomainError("bracket_norm_truncated: J' not above u0");
    const double kcap = Jp.lo - std::max(u0, model.domain.lo);
    const auto b = detail::branch_sup(model, Jp, -1, kcap, nk, nu, tol);
    r.value = b.value;
    r.k_witness = b.k;
    r.unbounded = b.unbounded;
  }
  r.argsup_k = r.k_witness;
  return r;
}

struct ControlTimes {
  double T1 = 0.0;
  double T2 = 0.0;
  double Tstar = 0.0;
};

/// T*_i = (b-a)/[|f|]_{I'_i}; T* = T*_1 + T*_2.
inline ControlTimes controllability_times(const FluxModel& model, Interval J1p, Interval J2p,
                                          double a, double b, double tol = 1e-6) {
  const auto m1 = bracket_norm(model, J1p, tol);
  const auto m2 = bracket_norm(model, J2p, tol);
  if (!(m1.value > tol)) throw NotControllable("[|f|] vanishes on I'_1");
  if (!(m2.value > tol)) throw NotControllable("[|f|] vanishes on I'_2");
  ControlTimes t;
  t.T1 = (b - a) / m1.value;
  t.T2 = (b - a) / m2.value;
  t.Tstar = t.T1 + t.T2;
  return t;
}

/// Boundary controllability time T-bar: max of sup (x-a)/pos(f'(psi(x))) and
/// sup (b-x)/neg(f'(psi(x))). A strictly interior critical point
/// f'(psi(x)) = 0 yields +inf; points of the wrong sign are skipped; an
/// empty range contributes 0.
inline double boundary_control_time(const FluxModel& model,
                                    const std::function<double(double)>& psi, double a,
                                    double b, int grid = 8193) {
  double sup1 = 0.0, sup2 = 0.0;
  double s_prev = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double x = a + (b - a) * i / grid;
    const double s = model.df(psi(x));
    const bool interior = i > 0 && i < grid;
    if (std::abs(s) <= 1e-12) {
      if (interior) return kInf;
      continue;
    }
    // a sign change between samples means f'(psi) vanishes in between
    if (i > 0 && i < grid && s_prev != 0.0 && ((s_prev > 0) != (s > 0))) return kInf;
    s_prev = s;
    if (s > 0) {
      sup1 = std::max(sup1, (x - a) / s);
    } else {
      sup2 = std::max(sup2, (b - x) / (-s));
    }
  }
  return std::max(sup1, sup2);
}

inline double boundary_control_time(const FluxModel& model, const ProfileC1& psi, double a,
                                    double b) {
  return boundary_control_time(model, [&](double x) { return psi.eval(x); }, a, b);
}

inline double boundary_control_time(const FluxModel& model, const ProfileBV& psi, double a,
                                    double b) {
  return boundary_control_time(model, [&](double x) { return psi.eval(x); }, a, b);
}

enum class Theorem { thm1, thm3, thm5 };

inline Theorem parse_theorem(const std::string& s) {
  if (s == "theorem1" || s == "1" || s == "thm1") return Theorem::thm1;
  if (s == "theorem3" || s == "3" || s == "thm3") return Theorem::thm3;
  if (s == "theorem5" || s == "5" || s == "thm5") return Theorem::thm5;
  throw ConfigError("unknown theorem identifier: " + s);
}

inline const char* to_string(Theorem t) {
  switch (t) {
    case Theorem::thm1: return "theorem1";
    case Theorem::thm3: return "theorem3";
    case Theorem::thm5: return "theorem5";
  }
  return "?";
}

struct CheckedCondition {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

struct HypothesisVerdict {
  Theorem theorem = Theorem::thm1;
  bool holds = false;
  std::vector<CheckedCondition> conditions;  // everything evaluated

  std::vector<CheckedCondition> violated_conditions() const {
    std::vector<CheckedCondition> v;
    for (const auto& c : conditions)
      if (!c.ok) v.push_back(c);
    return v;
  }
};

/// Evaluate the hypothesis set of Theorem 1/3/5 numerically. For concave
/// fluxes the one-sided roles are swapped; Theorem 5 admits BV data with
/// one-sided jumps (Dini bounds d^-/d^+ from the piecewise representation).
inline HypothesisVerdict check_hypotheses(Theorem theorem, const FluxModel& model,
                                          const ProfileBV& ubar, const ProfileBV& psi,
                                          Interval J1p, Interval J2p, double T, double rho,
                                          double tol = 1e-6) {
  HypothesisVerdict v;
  v.theorem = theorem;
  auto add = [&](std::string label, double lhs, double rhs, bool ok) {
    v.conditions.push_back({std::move(label), lhs, rhs, ok});
  };

  const double a = ubar.domain().lo, b = ubar.domain().hi;

  const auto m1 = bracket_norm(model, J1p, tol);
  const auto m2 = bracket_norm(model, J2p, tol);
  add("[|f|]_{I1'} > 0", m1.value, 0.0, m1.value > 0.0);
  add("[|f|]_{I2'} > 0", m2.value, 0.0, m2.value > 0.0);

  auto proper_inside = [&](const Interval& im, const Interval& J) {
    return im.lo >= J.lo && im.hi <= J.hi && (im.lo > J.lo || im.hi < J.hi);
  };
  {
    const Interval im = ubar.image();
    add("Im(ubar) strictly inside I1'", std::max(J1p.lo - im.lo, im.hi - J1p.hi), 0.0,
        proper_inside(im, J1p));
    const Interval imp = psi.image();
    add("Im(psi) strictly inside I2'", std::max(J2p.lo - imp.lo, imp.hi - J2p.hi), 0.0,
        proper_inside(imp, J2p));
  }

  // an unbounded bracket means arbitrarily fast transport: zero travel time
  double Tstar = kInf;
  if (m1.value > 0 && m2.value > 0)
    Tstar = (std::isfinite(m1.value) ? (b - a) / m1.value : 0.0) +
            (std::isfinite(m2.value) ? (b - a) / m2.value : 0.0);
  add("T > T*", T, Tstar, T > Tstar);

  const double F2 = sup_norm_on(model, DerivOrder::d2f, model.domain);
  const double rhs1 = std::isfinite(m1.value) ? m1.value / ((b - a) * F2) : kInf;
  const double rhs2 = std::isfinite(m2.value) ? m2.value / ((b - a) * F2) : kInf;

  const bool c1_profiles = ubar.pieces().size() == 1 && psi.pieces().size() == 1;

  switch (theorem) {
    case Theorem::thm1: {
      add("ubar, psi are C1", c1_profiles ? 0.0 : 1.0, 0.0, c1_profiles);
      double du = 0.0, dp = 0.0;
      for (const auto& p : ubar.pieces()) du = std::max(du, p.deriv_sup_norm());
      for (const auto& p : psi.pieces()) dp = std::max(dp, p.deriv_sup_norm());
      add("||ubar'|| < [|f|]_{I1'} / ((b-a) ||f''||)", du, rhs1, du < rhs1);
      add("||psi'|| < [|f|]_{I2'} / ((b-a) ||f''||)", dp, rhs2, dp < rhs2);
      break;
    }
    case Theorem::thm3: {
      add("ubar, psi are C1", c1_profiles ? 0.0 : 1.0, 0.0, c1_profiles);
      const bool shaped = model.shape != FluxShape::general;
      add("flux is convex or concave", shaped ? 0.0 : 1.0, 0.0, shaped);
      double du = 0.0, dp = 0.0;
      if (model.shape == FluxShape::concave) {
        for (const auto& p : ubar.pieces()) du = std::max(du, p.sup_pos_deriv());
        for (const auto& p : psi.pieces()) dp = std::max(dp, p.sup_neg_deriv());
        add("sup pos(ubar') <= [|f|]_{I1'}/((b-a)||f''||) - rho", du, rhs1 - rho,
            du <= rhs1 - rho);
        add("sup neg(psi') <= [|f|]_{I2'}/((b-a)||f''||) - rho", dp, rhs2 - rho,
            dp <= rhs2 - rho);
      } else {
        for (const auto& p : ubar.pieces()) du = std::max(du, p.sup_neg_deriv());
        for (const auto& p : psi.pieces()) dp = std::max(dp, p.sup_pos_deriv());
        add("sup neg(ubar') <= [|f|]_{I1'}/((b-a)||f''||) - rho", du, rhs1 - rho,
            du <= rhs1 - rho);
        add("sup pos(psi') <= [|f|]_{I2'}/((b-a)||f''||) - rho", dp, rhs2 - rho,
            dp <= rhs2 - rho);
      }
      break;
    }
    case Theorem::thm5: {
      const bool shaped = model.shape != FluxShape::general;
      add("flux is convex or concave", shaped ? 0.0 : 1.0, 0.0, shaped);
      double du, dp;
      if (model.shape == FluxShape::concave) {
        du = ubar.d_plus();
        dp = psi.d_minus();
        add("d+(ubar) < [|f|]_{I1'}/((b-a)||f''||) - rho", du, rhs1 - rho, du < rhs1 - rho);
        add("d-(psi) < [|f|]_{I2'}/((b-a)||f''||) - rho", dp, rhs2 - rho, dp < rhs2 - rho);
      } else {
        du = ubar.d_minus();
        dp = psi.d_plus();
        add("d-(ubar) < [|f|]_{I1'}/((b-a)||f''||) - rho", du, rhs1 - rho, du < rhs1 - rho);
        add("d+(psi) < [|f|]_{I2'}/((b-a)||f''||) - rho", dp, rhs2 - rho, dp < rhs2 - rho);
      }
      break;
    }
  }

  v.holds = true;
  for (const auto& c : v.conditions) v.holds = v.holds && c.ok;
  return v;
}

inline HypothesisVerdict check_hypotheses(Theorem theorem, const FluxModel& model,
                                          const ProfileC1& ubar, const ProfileC1& psi,
                                          Interval J1p, Interval J2p, double T, double rho,
                                          double tol = 1e-6) {
  return check_hypotheses(theorem, model, ProfileBV(ubar), ProfileBV(psi), J1p, J2p, T, rho,
                          tol);
}

}  // namespace claw
