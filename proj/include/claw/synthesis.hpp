#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "claw/control.hpp"
#include "claw/errors.hpp"
#include "claw/flux_metrics.hpp"
#include "claw/flux_model.hpp"
#include "claw/interval.hpp"
#include "claw/profile.hpp"

namespace claw {

enum class SelectionMode { full_bound, one_sided };

inline const char* to_string(SelectionMode m) {
  return m == SelectionMode::full_bound ? "full_bound" : "one_sided";
}

/// Which way the useful plateau sweeps across [a,b]: right_moving means the
/// foot points of [a,b] end up left of the domain (alpha_minus feeds [a,b]).
enum class MoveDirection { right_moving, left_moving };

inline const char* to_string(MoveDirection d) {
  return d == MoveDirection::right_moving ? "right_moving" : "left_moving";
}

struct SynthesisCertificate {
  // problem data
  double a = 0.0, b = 0.0;
  Interval J1p;
  double T = 0.0;  // stage horizon the parameters were selected for
  double rho = 0.0;
  SelectionMode mode = SelectionMode::full_bound;

  // selected parameters
  double eps1 = 0.0;
  double T0 = 0.0;
  double tau1 = 0.0;
  double T1 = 0.0;
  double k_bar = 0.0;
  double h_bar = 0.0;
  double alpha = 0.0;
  double w_star = 0.0;
  MoveDirection direction = MoveDirection::right_moving;

  // working quantities
  double bracket_value = 0.0;  // [|f|]_{I1'} (finite working value)
  double f1_sup = 0.0;         // ||f'|| over the traversed state interval
  double f2_sup = 0.0;         // ||f''|| over the flux domain
  double ubar_sup = 0.0;       // ||ubar||_{C0([a,b])}
  double ubar_neg_deriv = 0.0; // sup of the negative part of ubar'
  double c1_tol = 0.0;         // eps1 [|f|] / (2 (1+2 eps1))
  double argsup_bound = 0.0;   // argsup[|f|]_{I1',c1} + 1, envelope for |k_bar|
  bool bracket_unbounded = false;  // target-speed fallback was used

  // claimed bounds
  double bound_C1 = 0.0;
  double claimed_h_sup = 0.0;
  double claimed_h_tv = 0.0;
  double claimed_u_sup = 0.0;
  double claimed_u_tv = 0.0;

  ExtendedProfile ext;

  double tail_mass() const { return alpha + k_bar - w_star; }  // C in the tail
  double target_level() const { return alpha + k_bar; }        // w1 = alpha + T0 h_bar
};

namespace detail {

// Uniform sign and infimum of |Delta f(.;k)| over U. sign = +1 / -1 when
// Delta is uniformly positive / negative, 0 when it changes sign.
struct SignedInf {
  double inf_abs = 0.0;
  int sign = 0;
};

inline SignedInf signed_inf_delta(const FluxModel& model, Interval U, double k,
                                  int n = 1024) {
  SignedInf r;
  if (U.length() == 0.0) {
    const double d = delta_ext(model, U.lo, k);
    r.inf_abs = std::abs(d);
    r.sign = d > 0 ? 1 : (d < 0 ? -1 : 0);
    return r;
  }
  const double dmax = grid_max([&](double u) { return delta_ext(model, u, k); }, U.lo,
                               U.hi, n, 4, 1e-12).value;
  const double dmin = -grid_max([&](double u) { return -delta_ext(model, u, k); }, U.lo,
                                U.hi, n, 4, 1e-12).value;
  if (dmin > 0) {
    r.sign = 1;
    r.inf_abs = dmin;
  } else if (dmax < 0) {
    r.sign = -1;
    r.inf_abs = -dmax;
  } else {
    r.sign = 0;
    r.inf_abs = 0.0;
  }
  return r;
}

struct ShiftChoice {
  double k = 0.0;
  int sign = 0;     // sign of Delta f(.;k)
  double inf_abs = 0.0;
  bool found = false;
};

// Smallest |k| (per branch, then overall) with sign-definite Delta and
// inf |Delta| >= thresh. The k -> 0 limit (Delta = f') is tried first.
inline ShiftChoice smallest_qualifying_shift(const FluxModel& model, Interval U,
                                             double thresh, double kcap_pos,
                                             double kcap_neg) {
  ShiftChoice best;
  {
    const SignedInf s0 = signed_inf_delta(model, U, 0.0);
    if (s0.sign != 0 && s0.inf_abs >= thresh) {
      best = {0.0, s0.sign, s0.inf_abs, true};
      return best;
    }
  }

  auto branch = [&](int dir, double kcap) -> ShiftChoice {
    ShiftChoice c;
    if (!(kcap > 0.0) || !std::isfinite(kcap)) return c;
    const int n = 400;
    auto kof = [&](double t) { return dir * kcap * t * t; };
    double lo_t = 0.0, hi_t = -1.0;
    for (int i = 1; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      const SignedInf s = signed_inf_delta(model, U, kof(t), 512);
      if (s.sign != 0 && s.inf_abs >= thresh) {
        hi_t = t;
        break;
      }
      lo_t = t;
    }
    if (hi_t < 0) return c;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo_t + hi_t);
      const SignedInf s = signed_inf_delta(model, U, kof(mid), 512);
      if (s.sign != 0 && s.inf_abs >= thresh)
        hi_t = mid;
      else
        lo_t = mid;
      if ((hi_t - lo_t) * kcap < 1e-13) break;
    }
    const SignedInf s = signed_inf_delta(model, U, kof(hi_t), 2048);
    if (s.sign == 0 || s.inf_abs < thresh * (1.0 - 1e-9)) return c;
    c.k = kof(hi_t);
    c.sign = s.sign;
    c.inf_abs = s.inf_abs;
    c.found = true;
    return c;
  };

  const ShiftChoice pos = branch(+1, kcap_pos);
  const ShiftChoice neg = branch(-1, kcap_neg);
  if (pos.found && neg.found)
    return std::abs(pos.k) <= std::abs(neg.k) + 1e-12 ? pos : neg;
  return pos.found ? pos : neg;
}

inline double one_sided_deriv_value(const ProfileC1& p, SideRule rule) {
  switch (rule) {
    case SideRule::two_sided: return p.deriv_sup_norm();
    case SideRule::lower_only: return p.sup_neg_deriv();
    case SideRule::upper_only: return p.sup_pos_deriv();
  }
  return p.deriv_sup_norm();
}

}  // namespace detail

/// Recompute the claimed bounds of a certificate from its parameters (used
/// after changing w_star, e.g. for a tail-free composition stage).
inline void compute_certificate_claims(SynthesisCertificate& c) {
  const double len = c.b - c.a;
  const double C = c.tail_mass();
  const double delta = c.T - c.T1;
  c.claimed_h_tv = 2.0 * std::abs(c.k_bar) / c.T0 + 8.0 * std::abs(C) / (3.0 * delta);
  c.claimed_h_sup = 0.5 * c.claimed_h_tv;
  const double kb = std::abs(c.k_bar);
  c.bound_C1 = std::max({(6.0 * c.T + 3.0 * c.T0) * (1.0 + kb) / (c.T0 * (c.T - c.T0)),
                         8.0 * (1.0 + kb) / (c.T - c.T0), 4.0 * (2.0 + len) + kb});
  c.claimed_u_sup = kb + 4.0 * c.ubar_sup;
  c.claimed_u_tv = 4.0 * (1.0 + len) * (c.ubar_sup + c.ubar_neg_deriv);
}

/// Select the proof parameters (eps1, T0, tau1, T1, k_bar, h_bar, alpha) for a
/// null control steering ubar to the constant w_star on [a,b] in time T.
inline SynthesisCertificate select_parameters(const FluxModel& model, const ProfileC1& ubar,
                                              Interval J1p, double T, double rho,
                                              SelectionMode mode, double w_star = 0.0,
                                              bool tail_free = false) {
  const Interval dom = ubar.domain();
  const double a = dom.lo, b = dom.hi, len = b - a;
  if (!(T > 0)) throw FeasibilityError("T must be positive");
  if (!model.domain.contains(J1p)) throw DomainError("I'_1 not inside the flux domain");
  {
    const Interval im = ubar.image();
    if (!(im.lo >= J1p.lo && im.hi <= J1p.hi && (im.lo > J1p.lo || im.hi < J1p.hi)))
      throw FeasibilityError("Im(ubar) is not strictly inside I'_1");
  }

  const MetricReport m1 = bracket_norm(model, J1p);
  const bool unbounded = m1.unbounded;
  const double F2 = sup_norm_on(model, DerivOrder::d2f, model.domain);

  SideRule side = SideRule::two_sided;
  if (mode == SelectionMode::one_sided) {
    if (model.shape == FluxShape::general)
      throw FeasibilityError("one_sided mode needs a convex or concave flux");
    side = model.shape == FluxShape::convex ? SideRule::lower_only : SideRule::upper_only;
  }
  const double d_rel = detail::one_sided_deriv_value(ubar, side);

  std::string last_failure = "T <= T0 for every eps1 candidate";
  for (int j = 1; j <= 20; ++j) {
    const double eps1 = std::ldexp(1.0, -j);

    double m_work = m1.value;
    double thresh;
    if (!unbounded) {
      const double T0_cand = len * (1.0 + 2.0 * eps1) / m_work;
      // strict gate with a relative safety margin so that bracket-norm noise
      // of O(1e-12) cannot admit a degenerate tau1
      if (!(T > T0_cand * (1.0 + 1e-6))) continue;
      const double D = m_work / (len * (1.0 + 3.0 * eps1) * F2);
      const double limit = mode == SelectionMode::full_bound ? D : D - rho;
      if (!(d_rel < limit)) {
        last_failure = "derivative bound violated: " + std::to_string(d_rel) +
                       " >= " + std::to_string(limit);
        continue;
      }
      const double c1 = eps1 * m_work / (2.0 * (1.0 + 2.0 * eps1));
      thresh = m_work - 0.5 * c1;
    } else {
      // [|f|] = +inf: pick the smallest shift reaching twice the target
      // transport speed; the achieved inf|Delta| plays the role of [|f|].
      thresh = 2.0 * (1.0 + 2.0 * eps1) * len / T;
    }

    // extension with the slope bound of the selected regime
    ExtendedProfile ext;
    try {
      double bridge_bound;
      if (!unbounded) {
        bridge_bound = m_work / (len * (1.0 + 3.0 * eps1) * F2);
        if (mode == SelectionMode::one_sided) bridge_bound -= rho;
      } else {
        bridge_bound = std::max(ubar.deriv_sup_norm(), 1e-6);
      }
      ext = extend_profile(ubar, eps1, bridge_bound, side, J1p);
    } catch (const ExtensionInfeasible& e) {
      last_failure = e.what();
      continue;
    }

    const Interval U = ext.full.image();
    if (!(U.lo >= J1p.lo - 1e-12 && U.hi <= J1p.hi + 1e-12)) {
      last_failure = "extension image leaves I'_1";
      continue;
    }

    const double kcap_pos = model.domain.hi - U.hi;
    const double kcap_neg = U.lo - model.domain.lo;
    const detail::ShiftChoice kc = detail::smallest_qualifying_shift(
        model, U, thresh, std::isfinite(kcap_pos) ? kcap_pos : 1e6,
        std::isfinite(kcap_neg) ? kcap_neg : 1e6);
    if (!kc.found) {
      last_failure = "no admissible shift reaches the transport-speed threshold";
      continue;
    }

    if (unbounded) {
      m_work = kc.inf_abs;
      const double D = m_work / (len * (1.0 + 3.0 * eps1) * F2);
      const double limit = mode == SelectionMode::full_bound ? D : D - rho;
      if (!(d_rel < limit)) {
        last_failure = "derivative bound violated after the target-speed fallback";
        continue;
      }
    }

    SynthesisCertificate c;
    c.a = a;
    c.b = b;
    c.J1p = J1p;
    c.T = T;
    c.rho = rho;
    c.mode = mode;
    c.eps1 = eps1;
    c.bracket_value = m_work;
    c.bracket_unbounded = unbounded;
    c.T0 = len * (1.0 + 2.0 * eps1) / m_work;
    if (!(T > c.T0 * (1.0 + 1e-6))) {
      last_failure = "T <= T0 after the target-speed fallback";
      continue;
    }
    c.k_bar = kc.k;
    c.h_bar = c.k_bar / c.T0;
    c.direction = kc.sign > 0 ? MoveDirection::right_moving : MoveDirection::left_moving;
    c.alpha = kc.sign > 0 ? ext.alpha_minus : ext.alpha_plus;
    c.w_star = tail_free ? c.alpha + c.k_bar : w_star;
    c.ext = ext;
    c.f2_sup = F2;
    c.ubar_sup = ubar.sup_norm();
    c.ubar_neg_deriv = ubar.sup_neg_deriv();
    c.c1_tol = eps1 * m_work / (2.0 * (1.0 + 2.0 * eps1));

    // state excursion: the exact z0 range is Im(ext) + range of H
    const double C = c.tail_mass();
    const double h_lo = std::min({0.0, c.k_bar, c.k_bar - C});
    const double h_hi = std::max({0.0, c.k_bar, c.k_bar - C});
    const Interval W(U.lo + h_lo, U.hi + h_hi);
    if (!(W.lo >= model.domain.lo - 1e-12 && W.hi <= model.domain.hi + 1e-12))
      throw FeasibilityError("state excursion leaves the flux domain");
    c.f1_sup = sup_norm_on(model, DerivOrder::df,
                           Interval(std::max(W.lo, model.domain.lo),
                                    std::min(W.hi, model.domain.hi)));

    c.tau1 = 0.5 * std::min({eps1 * len / (6.0 * c.f1_sup), eps1 * len / m_work,
                             0.96 * (T - c.T0)});
    c.T1 = c.T0 + c.tau1;

    try {
      c.argsup_bound = std::abs(argsup_k(model, J1p, c.c1_tol)) + 1.0;
    } catch (const Error&) {
      c.argsup_bound = std::abs(c.k_bar) + 1.0;  // auxiliary envelope fallback
    }
    if (std::abs(c.k_bar) > c.argsup_bound + 1e-9)
      c.argsup_bound = std::abs(c.k_bar) + 1.0;

    compute_certificate_claims(c);
    return c;
  }

  throw FeasibilityError("no eps1 in {2^-1..2^-20} works: " + last_failure +
                         " (T=" + std::to_string(T) + ", [|f|]=" + std::to_string(m1.value) +
                         ")");
}

/// The six-piece control of the null-control construction: ramp / plateau /
/// ramp carrying the shift k_bar, then the tail transferring -C with
/// C = alpha + T0 h_bar - w_star. Continuous with h(0) = h(T) = 0.
inline ControlSignal build_null_control(const SynthesisCertificate& cert, double T) {
  if (!(T > cert.T1)) throw FeasibilityError("build_null_control: T <= T1");
  const double tau1 = cert.tau1, T0 = cert.T0, T1 = cert.T1, hb = cert.h_bar;
  const double C = cert.tail_mass();
  const double delta = T - T1;
  const double plateau = -4.0 * C / (3.0 * delta);

  std::vector<ControlPiece> p;
  p.push_back({0.0, tau1, 0.0, hb / tau1});
  p.push_back({tau1, T0, hb, 0.0});
  p.push_back({T0, T1, hb, -hb / tau1});
  const double q1 = (T + 3.0 * T1) / 4.0;
  const double q3 = (3.0 * T + T1) / 4.0;
  p.push_back({T1, q1, 0.0, -16.0 * C / (3.0 * delta * delta)});
  p.push_back({q1, q3, plateau, 0.0});
  p.push_back({q3, T, plateau, 16.0 * C / (3.0 * delta * delta)});
  return ControlSignal(std::move(p));
}

/// Exhaustive consistency checks between a certificate and its realized
/// signal; every certified bound is evaluated with measured vs claimed values.
inline std::vector<CheckedCondition> certificate_checks(const SynthesisCertificate& c,
                                                        const ControlSignal& h) {
  std::vector<CheckedCondition> out;
  auto add = [&](std::string label, double lhs, double rhs, bool ok) {
    out.push_back({std::move(label), lhs, rhs, ok});
  };
  const double len = c.b - c.a;
  const double tol = 1e-12;

  const double T0_expect = len * (1.0 + 2.0 * c.eps1) / c.bracket_value;
  add("T0 = (b-a)(1+2eps1)/[|f|]", c.T0, T0_expect,
      std::abs(c.T0 - T0_expect) <= tol * std::max(1.0, T0_expect));
  add("T1 = T0 + tau1", c.T1, c.T0 + c.tau1,
      std::abs(c.T1 - (c.T0 + c.tau1)) <= tol * std::max(1.0, c.T1));
  const double tau_bound = std::min({c.eps1 * len / (6.0 * c.f1_sup),
                                     c.eps1 * len / c.bracket_value,
                                     0.5 * (c.T - c.T0)});
  add("tau1 < min{eps1(b-a)/(6||f'||), eps1(b-a)/[|f|], (T-T0)/2}", c.tau1, tau_bound,
      c.tau1 < tau_bound);
  add("|k_bar| <= argsup + 1", std::abs(c.k_bar), c.argsup_bound,
      std::abs(c.k_bar) <= c.argsup_bound + 1e-9);

  const double HT1 = h.primitive(c.T1);
  const double scale_k = std::max(1.0, std::abs(c.k_bar));
  add("H(T1) = T0 h_bar", HT1, c.T0 * c.h_bar,
      std::abs(HT1 - c.T0 * c.h_bar) <= 1e-12 * scale_k);
  const double tail = h.primitive(c.T) - HT1;
  const double C = c.tail_mass();
  add("H(T) - H(T1) = -(alpha + T0 h_bar - w*)", tail, -C,
      std::abs(tail + C) <= 1e-12 * std::max(1.0, std::abs(C)));

  const double tv = h.total_variation();
  add("TV(h) matches closed form", tv, c.claimed_h_tv,
      std::abs(tv - c.claimed_h_tv) <= 1e-12 * std::max(1.0, c.claimed_h_tv));
  add("||h|| <= TV(h)/2", h.sup_norm(), 0.5 * tv,
      h.sup_norm() <= 0.5 * tv + 1e-12 * std::max(1.0, tv));
  add("sup|H| <= |k_bar| + ||ubar||", h.primitive_sup(), std::abs(c.k_bar) + c.ubar_sup,
      h.primitive_sup() <= std::abs(c.k_bar) + c.ubar_sup + 1e-9);

  const double env = std::max((6.0 * c.T + 3.0 * c.T0) / (c.T0 * (c.T - c.T0)),
                              8.0 / (c.T - c.T0)) *
                     (std::abs(c.k_bar) + c.ubar_sup);
  add("||h|| + TV(h) <= totvar-h-2 envelope", h.sup_norm() + tv, env,
      h.sup_norm() + tv <= env + 1e-9);
  add("||h|| + TV(h) <= C1 (1 + ||ubar|| + |w*|)", h.sup_norm() + tv,
      c.bound_C1 * (1.0 + c.ubar_sup + std::abs(c.w_star)),
      h.sup_norm() + tv <= c.bound_C1 * (1.0 + c.ubar_sup + std::abs(c.w_star)) + 1e-9);
  return out;
}

inline void verify_certificate(const SynthesisCertificate& c, const ControlSignal& h) {
  for (const auto& chk : certificate_checks(c, h))
    if (!chk.ok)
      throw CertificateViolation(chk.label + " (measured " + std::to_string(chk.lhs) +
                                 ", bound " + std::to_string(chk.rhs) + ")");
}

struct U0Result {
  double u0 = 0.0;
  ShiftDirection direction = ShiftDirection::k_nonneg;
  MetricReport metric;
  double f2_sup = 0.0;  // ||f''|| over the truncated domain
};

/// Smallest truncation level u0 on a geometric grid such that the truncated
/// bracket norm dominates both the travel-time and the no-blow-up conditions
/// (Theorem 2 regime; H2(ii) growth upward or H2(iii) downward).
inline U0Result u0_search(const FluxModel& model, const ProfileC1& ubar, double T,
                          SideRule side = SideRule::two_sided) {
  const Interval im = ubar.image();
  const double len = ubar.domain().length();
  const double du = detail::one_sided_deriv_value(ubar, side);

  ShiftDirection dir;
  if (!std::isfinite(model.domain.hi))
    dir = ShiftDirection::k_nonneg;
  else if (!std::isfinite(model.domain.lo))
    dir = ShiftDirection::k_nonpos;
  else
    throw H2Violation("flux domain is bounded; f' cannot grow without bound");

  double prev = -kInf;
  int stalls = 0;
  for (int j = 0; j <= 40; ++j) {
    double u0;
    Interval trunc;
    if (dir == ShiftDirection::k_nonneg) {
      u0 = std::max(1.0, im.hi + 1.0) * std::ldexp(1.0, j);
      trunc = Interval(model.domain.lo, u0);
    } else {
      u0 = std::min(-1.0, im.lo - 1.0) * std::ldexp(1.0, j);
      trunc = Interval(u0, model.domain.hi);
    }
    const MetricReport m = bracket_norm_truncated(model, im, u0, dir);
    const double F2 = sup_norm_on(model, DerivOrder::d2f, trunc);
    const bool time_ok = T > len / m.value;
    const bool slope_ok = du < m.value / (len * F2);
    if (time_ok && slope_ok) {
      U0Result r;
      r.u0 = u0;
      r.direction = dir;
      r.metric = m;
      r.f2_sup = F2;
      return r;
    }
    // H2 growth check: the truncated bracket must keep growing
    if (m.value <= prev * 1.01) {
      if (++stalls >= 3)
        throw H2Violation("truncated [|f|] stopped growing before the conditions held");
    } else {
      stalls = 0;
    }
    prev = m.value;
  }
  throw H2Violation("no truncation level below the overflow guard satisfies H2");
}

struct StagePlan {
  SynthesisCertificate cert;
  ControlSignal signal;  // stage-local clock [0, duration]
  double duration = 0.0;
  FluxModel model;       // possibly truncated for the Theorem 2 regime
};

struct CompositionPlan {
  StagePlan stage_a;      // steers ubar forward to the constant w1
  StagePlan stage_c;      // steers psi(a+b-x) forward to the constant w2
  ControlSignal bridge;   // stage-local [0, t_b], integral w2 - w1
  double t_a = 0.0, t_b = 0.0, t_c = 0.0;
  double w1 = 0.0, w2 = 0.0;
  double T = 0.0;
  double Tstar = 0.0;
  double bound_C1_total = 0.0;
  double claimed_total = 0.0;  // C1_total (1 + ||ubar|| + ||psi||)
  ProfileC1 psi;
};

/// Three-stage composition: null control of ubar to w1, a smooth bridge
/// carrying w2 - w1, and the time reversal of the null control steering the
/// reflected target to w2. Slack beyond T* is split 40/20/40.
inline std::pair<ControlSignal, CompositionPlan> compose_full_control(
    const FluxModel& model, const ProfileC1& ubar, const ProfileC1& psi, double T,
    double rho, Interval J1p, Interval J2p,
    SelectionMode mode = SelectionMode::full_bound) {
  const double len = ubar.domain().length();

  const MetricReport m1 = bracket_norm(model, J1p);
  const MetricReport m2 = bracket_norm(model, J2p);
  const double Ts1 = m1.unbounded ? 0.0 : len / m1.value;
  const double Ts2 = m2.unbounded ? 0.0 : len / m2.value;
  const double Tstar = Ts1 + Ts2;
  if (!(T > Tstar))
    throw FeasibilityError("T = " + std::to_string(T) +
                           " does not exceed T* = " + std::to_string(Tstar));

  const double slack = T - Tstar;
  const double t_a = Ts1 + 0.4 * slack;
  const double t_b = 0.2 * slack;
  const double t_c = T - t_a - t_b;

  auto make_stage = [&](const ProfileC1& data, Interval Jp, double dur) -> StagePlan {
    StagePlan s;
    s.model = model;
    s.duration = dur;
    if (bracket_norm(model, Jp).unbounded) {
      SideRule side = SideRule::two_sided;
      if (mode == SelectionMode::one_sided && model.shape != FluxShape::general)
        side = model.shape == FluxShape::convex ? SideRule::lower_only
                                                : SideRule::upper_only;
      const U0Result u0 = u0_search(model, data, dur, side);
      s.model = model.restrict_to(u0.direction == ShiftDirection::k_nonneg
                                      ? Interval(model.domain.lo, u0.u0)
                                      : Interval(u0.u0, model.domain.hi));
      Jp = Interval(std::max(Jp.lo, s.model.domain.lo), std::min(Jp.hi, s.model.domain.hi));
    }
    // tail-free: the stage holds its plateau level and the bridge carries
    // the remaining transfer
    s.cert = select_parameters(s.model, data, Jp, dur, rho, mode, 0.0, true);
    s.signal = build_null_control(s.cert, dur);
    return s;
  };

  CompositionPlan plan;
  plan.psi = psi;
  plan.T = T;
  plan.Tstar = Tstar;
  plan.t_a = t_a;
  plan.t_b = t_b;
  plan.t_c = t_c;
  plan.stage_a = make_stage(ubar, J1p, t_a);
  plan.stage_c = make_stage(psi.reflected(), J2p, t_c);
  plan.w1 = plan.stage_a.cert.target_level();
  plan.w2 = plan.stage_c.cert.target_level();

  const double peak = 2.0 * (plan.w2 - plan.w1) / t_b;
  plan.bridge = ControlSignal({ControlPiece{0.0, 0.5 * t_b, 0.0, 2.0 * peak / t_b},
                               ControlPiece{0.5 * t_b, t_b, peak, -2.0 * peak / t_b}});

  const double kb1 = std::abs(plan.stage_a.cert.k_bar);
  const double kb2 = std::abs(plan.stage_c.cert.k_bar);
  plan.bound_C1_total = plan.stage_a.cert.bound_C1 + plan.stage_c.cert.bound_C1 +
                        6.0 * (2.0 + kb1 + kb2) / t_b;
  plan.claimed_total =
      plan.bound_C1_total * (1.0 + ubar.sup_norm() + psi.sup_norm());

  ControlSignal composed = plan.stage_a.signal.concat(plan.bridge.shifted(t_a));
  const ControlSignal reversed_c = plan.stage_c.signal.reversed(t_c).negated();
  composed = composed.concat(reversed_c.shifted(T - t_c));
  return {std::move(composed), std::move(plan)};
}

}  // namespace claw
