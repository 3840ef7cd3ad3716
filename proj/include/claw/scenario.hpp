#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "claw/io_util.hpp"
#include "claw/steering.hpp"

namespace claw {

using ojson = nlohmann::ordered_json;

namespace detail {

/// Strict field validation: every present key must be declared, every
/// required key must be present.
inline void expect_fields(const ojson& j, const std::string& ctx,
                          const std::vector<std::string>& required,
                          const std::vector<std::string>& optional = {}) {
  if (!j.is_object()) throw ConfigError(ctx + ": expected a JSON object");
  for (const auto& item : j.items()) {
    const std::string& key = item.key();
    if (std::find(required.begin(), required.end(), key) == required.end() &&
        std::find(optional.begin(), optional.end(), key) == optional.end())
      throw ConfigError(ctx + ": unknown field '" + key + "'");
  }
  for (const std::string& key : required)
    if (!j.contains(key)) throw ConfigError(ctx + ": missing field '" + key + "'");
}

inline double num(const ojson& j, const std::string& ctx) {
  if (!j.is_number()) throw ConfigError(ctx + ": expected a number");
  return j.get<double>();
}

inline Interval interval_from_json(const ojson& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(ctx + ": expected [lo, hi]");
  const double lo = num(j[0], ctx), hi = num(j[1], ctx);
  if (!(lo < hi)) throw ConfigError(ctx + ": needs lo < hi");
  return Interval(lo, hi);
}

/// +-inf is not representable in JSON; encode as the strings "inf" / "-inf".
inline ojson json_number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Profile serialization: pieces of C1 knot data plus the implied jumps.
// ---------------------------------------------------------------------------

inline ojson profile_to_json(const ProfileBV& p) {
  ojson j;
  j["schema"] = 1;
  j["pieces"] = ojson::array();
  for (const ProfileC1& piece : p.pieces()) {
    ojson jp;
    jp["x_lo"] = piece.domain().lo;
    jp["x_hi"] = piece.domain().hi;
    jp["knots"] = ojson::array();
    for (std::size_t i = 0; i < piece.knots_x().size(); ++i)
      jp["knots"].push_back(
          {{"x", piece.knots_x()[i]}, {"u", piece.knots_u()[i]}, {"du", piece.knots_du()[i]}});
    j["pieces"].push_back(std::move(jp));
  }
  j["jumps"] = ojson::array();
  for (std::size_t i = 0; i + 1 < p.pieces().size(); ++i) {
    const ProfileC1& l = p.pieces()[i];
    const ProfileC1& r = p.pieces()[i + 1];
    j["jumps"].push_back({{"x", l.domain().hi},
                          {"u_left", l.knots_u().back()},
                          {"u_right", r.knots_u().front()}});
  }
  return j;
}

inline ojson profile_to_json(const ProfileC1& p) { return profile_to_json(ProfileBV(p)); }

inline ProfileBV profile_from_json(const ojson& j, const std::string& ctx) {
  detail::expect_fields(j, ctx, {"pieces"}, {"schema", "jumps"});
  if (j.contains("schema") && j["schema"] != 1)
    throw ConfigError(ctx + ": unsupported schema");
  if (!j["pieces"].is_array() || j["pieces"].empty())
    throw ConfigError(ctx + ": 'pieces' must be a non-empty array");

  std::vector<ProfileC1> pieces;
  for (const ojson& jp : j["pieces"]) {
    detail::expect_fields(jp, ctx + ".pieces[]", {"x_lo", "x_hi", "knots"});
    std::vector<double> xs, us, dus;
    for (const ojson& k : jp["knots"]) {
      detail::expect_fields(k, ctx + ".knots[]", {"x", "u", "du"});
      xs.push_back(detail::num(k["x"], ctx));
      us.push_back(detail::num(k["u"], ctx));
      dus.push_back(detail::num(k["du"], ctx));
    }
    if (xs.size() < 2) throw ConfigError(ctx + ": a piece needs at least two knots");
    const double x_lo = detail::num(jp["x_lo"], ctx), x_hi = detail::num(jp["x_hi"], ctx);
    if (std::abs(xs.front() - x_lo) > 1e-12 || std::abs(xs.back() - x_hi) > 1e-12)
      throw ConfigError(ctx + ": piece bounds do not match its knots");
    pieces.emplace_back(std::move(xs), std::move(us), std::move(dus));
  }
  ProfileBV p(std::move(pieces));

  if (j.contains("jumps")) {
    const auto& ps = p.pieces();
    if (j["jumps"].size() != ps.size() - 1)
      throw ConfigError(ctx + ": jump count does not match piece boundaries");
    std::size_t i = 0;
    for (const ojson& jj : j["jumps"]) {
      detail::expect_fields(jj, ctx + ".jumps[]", {"x", "u_left", "u_right"});
      const double x = detail::num(jj["x"], ctx);
      const double ul = detail::num(jj["u_left"], ctx);
      const double ur = detail::num(jj["u_right"], ctx);
      if (std::abs(x - ps[i].domain().hi) > 1e-12 ||
          std::abs(ul - ps[i].knots_u().back()) > 1e-9 ||
          std::abs(ur - ps[i + 1].knots_u().front()) > 1e-9)
        throw ConfigError(ctx + ": jump record inconsistent with the pieces");
      ++i;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Control signal serialization.
// ---------------------------------------------------------------------------

inline ojson control_to_json(const ControlSignal& h) {
  ojson j;
  j["schema"] = 1;
  j["pieces"] = ojson::array();
  for (const ControlPiece& p : h.pieces())
    j["pieces"].push_back(
        {{"t_lo", p.t_lo}, {"t_hi", p.t_hi}, {"c0", p.c0}, {"c1", p.c1}});
  return j;
}

inline ControlSignal control_from_json(const ojson& j, const std::string& ctx) {
  detail::expect_fields(j, ctx, {"pieces"}, {"schema"});
  std::vector<ControlPiece> pieces;
  for (const ojson& jp : j["pieces"]) {
    detail::expect_fields(jp, ctx + ".pieces[]", {"t_lo", "t_hi", "c0", "c1"});
    pieces.push_back({detail::num(jp["t_lo"], ctx), detail::num(jp["t_hi"], ctx),
                      detail::num(jp["c0"], ctx), detail::num(jp["c1"], ctx)});
  }
  return ControlSignal(std::move(pieces));
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

inline ojson metric_to_json(const MetricReport& m) {
  ojson j;
  j["value"] = detail::json_number(m.value);
  j["k_witness"] = m.k_witness;
  j["direction"] = to_string(m.direction);
  j["epsilon"] = m.epsilon;
  j["argsup_k"] = m.argsup_k;
  return j;
}

inline ojson conditions_to_json(const std::vector<CheckedCondition>& cs) {
  ojson arr = ojson::array();
  for (const CheckedCondition& c : cs)
    arr.push_back({{"label", c.label},
                   {"measured", detail::json_number(c.lhs)},
                   {"bound", detail::json_number(c.rhs)},
                   {"pass", c.ok}});
  return arr;
}

inline ojson verdict_to_json(const HypothesisVerdict& v) {
  ojson j;
  j["theorem"] = to_string(v.theorem);
  j["holds"] = v.holds;
  j["conditions"] = conditions_to_json(v.conditions);
  return j;
}

inline ojson certificate_to_json(const SynthesisCertificate& c) {
  ojson j;
  j["a"] = c.a;
  j["b"] = c.b;
  j["I1p"] = {c.J1p.lo, c.J1p.hi};
  j["T"] = c.T;
  j["rho"] = c.rho;
  j["mode"] = to_string(c.mode);
  j["eps1"] = c.eps1;
  j["T0"] = c.T0;
  j["tau1"] = c.tau1;
  j["T1"] = c.T1;
  j["k_bar"] = c.k_bar;
  j["h_bar"] = c.h_bar;
  j["alpha"] = c.alpha;
  j["w_star"] = c.w_star;
  j["direction"] = to_string(c.direction);
  j["bracket_value"] = c.bracket_value;
  j["bracket_unbounded"] = c.bracket_unbounded;
  j["f1_sup"] = c.f1_sup;
  j["f2_sup"] = c.f2_sup;
  j["ubar_sup"] = c.ubar_sup;
  j["ubar_neg_deriv"] = c.ubar_neg_deriv;
  j["c1_tol"] = c.c1_tol;
  j["argsup_bound"] = c.argsup_bound;
  j["bound_C1"] = c.bound_C1;
  j["claimed_h_sup"] = c.claimed_h_sup;
  j["claimed_h_tv"] = c.claimed_h_tv;
  j["claimed_u_sup"] = c.claimed_u_sup;
  j["claimed_u_tv"] = c.claimed_u_tv;
  j["alpha_minus"] = c.ext.alpha_minus;
  j["alpha_plus"] = c.ext.alpha_plus;
  return j;
}

// ---------------------------------------------------------------------------
// Scenario.
// ---------------------------------------------------------------------------

struct ScenarioGrid {
  double dx = 2e-3;
  int fan_points = 801;
  int time_steps = 128;
};

struct Scenario {
  std::string name;
  std::string flux_name;
  FluxModel model;
  double a = 0.0, b = 1.0;
  double T = 0.0;
  double rho = 0.0;
  Theorem theorem = Theorem::thm1;
  Interval I1p, I2p;
  ProfileBV ubar, psi;
  ScenarioGrid grid;
  double tol = 1e-6;
  std::vector<int> bv_n = {25, 50, 100};

  SelectionMode mode() const {
    return theorem == Theorem::thm1 ? SelectionMode::full_bound
                                    : SelectionMode::one_sided;
  }
  /// The single C1 piece of a jump-free profile (required by thm1/thm3).
  static const ProfileC1& as_c1(const ProfileBV& p, const std::string& what) {
    if (p.pieces().size() != 1)
      throw ConfigError(what + " must be C1 (a single piece) for this theorem");
    return p.pieces().front();
  }
};

namespace detail {

inline ProfileBV make_profile(const ojson& spec, double a, double b,
                              const std::filesystem::path& base_dir,
                              const std::string& ctx) {
  if (!spec.is_object() || !spec.contains("type"))
    throw ConfigError(ctx + ": profile spec needs a 'type'");
  const std::string type = spec["type"].get<std::string>();
  if (type == "constant") {
    expect_fields(spec, ctx, {"type", "value"});
    return ProfileBV(ProfileC1::constant(num(spec["value"], ctx), a, b));
  }
  if (type == "sine") {
    expect_fields(spec, ctx, {"type", "base", "amp"}, {"periods", "phase", "knots"});
    const double base = num(spec["base"], ctx), amp = num(spec["amp"], ctx);
    const double periods = spec.contains("periods") ? num(spec["periods"], ctx) : 1.0;
    const double phase = spec.contains("phase") ? num(spec["phase"], ctx) : 0.0;
    const int knots = spec.contains("knots") ? spec["knots"].get<int>() : 257;
    const double pi = std::acos(-1.0);
    const double w = periods * pi / (b - a);
    return ProfileBV(ProfileC1::from_function(
        [=](double x) { return base + amp * std::sin(phase + w * (x - a)); },
        [=](double x) { return amp * w * std::cos(phase + w * (x - a)); }, a, b, knots));
  }
  if (type == "pieces") {
    ojson inner = spec;
    inner.erase("type");
    ProfileBV p = profile_from_json(inner, ctx);
    if (std::abs(p.domain().lo - a) > 1e-12 || std::abs(p.domain().hi - b) > 1e-12)
      throw ConfigError(ctx + ": profile domain does not match [a, b]");
    return p;
  }
  if (type == "file") {
    expect_fields(spec, ctx, {"type", "path"});
    const std::filesystem::path path = base_dir / spec["path"].get<std::string>();
    std::ifstream in(path);
    if (!in) throw ConfigError(ctx + ": cannot open profile file " + path.string());
    ojson j = ojson::parse(in, nullptr, true);
    ProfileBV p = profile_from_json(j, ctx + " (" + path.filename().string() + ")");
    if (std::abs(p.domain().lo - a) > 1e-12 || std::abs(p.domain().hi - b) > 1e-12)
      throw ConfigError(ctx + ": profile domain does not match [a, b]");
    return p;
  }
  throw ConfigError(ctx + ": unknown profile type '" + type + "'");
}

}  // namespace detail

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("scenario JSON parse error: ") + e.what());
  }
  const std::filesystem::path base_dir = std::filesystem::path(path).parent_path();

  detail::expect_fields(
      j, "scenario", {"schema", "name", "flux", "a", "b", "T", "theorem", "I1p", "I2p",
                      "ubar", "psi"},
      {"rho", "grid", "tol", "bv_n"});
  if (j["schema"] != 1) throw ConfigError("scenario: unsupported schema version");

  Scenario s;
  s.name = j["name"].get<std::string>();
  if (j["flux"].is_string()) {
    s.flux_name = j["flux"].get<std::string>();
    s.model = builtin_flux(s.flux_name);
  } else {
    detail::expect_fields(j["flux"], "scenario.flux", {"csv"});
    const std::filesystem::path p = base_dir / j["flux"]["csv"].get<std::string>();
    s.flux_name = p.filename().string();
    s.model = load_flux_csv(p.string());
  }
  s.a = detail::num(j["a"], "scenario.a");
  s.b = detail::num(j["b"], "scenario.b");
  if (!(s.a < s.b)) throw ConfigError("scenario: needs a < b");
  s.T = detail::num(j["T"], "scenario.T");
  s.rho = j.contains("rho") ? detail::num(j["rho"], "scenario.rho") : 0.0;
  try {
    s.theorem = parse_theorem(j["theorem"].get<std::string>());
  } catch (const Error& e) {
    throw ConfigError(std::string("scenario.theorem: ") + e.what());
  }
  s.I1p = detail::interval_from_json(j["I1p"], "scenario.I1p");
  s.I2p = detail::interval_from_json(j["I2p"], "scenario.I2p");
  s.ubar = detail::make_profile(j["ubar"], s.a, s.b, base_dir, "scenario.ubar");
  s.psi = detail::make_profile(j["psi"], s.a, s.b, base_dir, "scenario.psi");
  if (j.contains("grid")) {
    detail::expect_fields(j["grid"], "scenario.grid", {},
                          {"dx", "fan_points", "time_steps"});
    if (j["grid"].contains("dx")) s.grid.dx = detail::num(j["grid"]["dx"], "grid.dx");
    if (j["grid"].contains("fan_points"))
      s.grid.fan_points = j["grid"]["fan_points"].get<int>();
    if (j["grid"].contains("time_steps"))
      s.grid.time_steps = j["grid"]["time_steps"].get<int>();
    if (!(s.grid.dx > 0) || s.grid.fan_points < 3 || s.grid.time_steps < 1)
      throw ConfigError("scenario.grid: invalid resolution");
  }
  if (j.contains("tol")) s.tol = detail::num(j["tol"], "scenario.tol");
  if (j.contains("bv_n")) {
    s.bv_n.clear();
    for (const ojson& n : j["bv_n"]) s.bv_n.push_back(n.get<int>());
    if (s.bv_n.empty()) throw ConfigError("scenario.bv_n: empty");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Command pipelines. Exit-code policy is applied by the CLI: pass=false with
// hypothesis_ok=false means code 2, pass=false otherwise means code 4;
// library exceptions map to 2 (feasibility), 3 (solver) or 4 (verification).
// ---------------------------------------------------------------------------

struct CommandResult {
  ojson report;
  bool pass = true;
  bool hypothesis_ok = true;
};

inline void write_report(const ojson& report, const std::string& out_dir,
                         const std::string& file = "report.json") {
  if (out_dir.empty()) return;
  std::filesystem::create_directories(out_dir);
  write_file_atomic((std::filesystem::path(out_dir) / file).string(),
                    report.dump(2) + "\n");
}

inline CommandResult run_metrics(const Scenario& s) {
  CommandResult res;
  ojson& j = res.report;
  j["schema"] = 1;
  j["command"] = "metrics";
  j["scenario"] = s.name;
  j["flux"] = s.flux_name;

  const MetricReport m1 = bracket_norm(s.model, s.I1p);
  const MetricReport m2 = bracket_norm(s.model, s.I2p);
  j["bracket_I1p"] = metric_to_json(m1);
  j["bracket_I2p"] = metric_to_json(m2);

  const ControlTimes ct = controllability_times(s.model, s.I1p, s.I2p, s.a, s.b);
  j["T_star_1"] = detail::json_number(ct.T1);
  j["T_star_2"] = detail::json_number(ct.T2);
  j["T_star"] = detail::json_number(ct.Tstar);
  j["T_bar_ubar"] = detail::json_number(boundary_control_time(s.model, s.ubar, s.a, s.b));
  j["T_bar_psi"] = detail::json_number(boundary_control_time(s.model, s.psi, s.a, s.b));

  const HypothesisVerdict v =
      check_hypotheses(s.theorem, s.model, s.ubar, s.psi, s.I1p, s.I2p, s.T, s.rho);
  j["hypotheses"] = verdict_to_json(v);
  res.hypothesis_ok = v.holds;
  j["pass"] = true;
  return res;
}

inline CommandResult run_steer(const Scenario& s, std::optional<double> fv_dx,
                               bool force, const std::string& out_dir) {
  CommandResult res;
  ojson& j = res.report;
  j["schema"] = 1;
  j["command"] = "steer";
  j["scenario"] = s.name;
  j["flux"] = s.flux_name;

  const HypothesisVerdict v =
      check_hypotheses(s.theorem, s.model, s.ubar, s.psi, s.I1p, s.I2p, s.T, s.rho);
  j["hypotheses"] = verdict_to_json(v);
  res.hypothesis_ok = v.holds;
  if (!v.holds && !force) {
    j["pass"] = false;
    res.pass = false;
    write_report(j, out_dir);
    return res;
  }

  const ProfileC1& ubar = Scenario::as_c1(s.ubar, "ubar");
  const ProfileC1& psi = Scenario::as_c1(s.psi, "psi");
  auto [h, plan] =
      compose_full_control(s.model, ubar, psi, s.T, s.rho, s.I1p, s.I2p, s.mode());

  const ClassicalOptions copt{s.grid.fan_points, s.grid.time_steps, 1e10, std::nullopt};
  const ClassicalSolution sol_a = solve_classical(
      plan.stage_a.model, plan.stage_a.cert.ext, plan.stage_a.signal, plan.t_a, copt);
  const ClassicalSolution sol_c = solve_classical(
      plan.stage_c.model, plan.stage_c.cert.ext, plan.stage_c.signal, plan.t_c, copt);

  const SteeringReport vr = verify_steering_classical(plan, h, sol_a, sol_c);

  ojson comp;
  comp["T"] = plan.T;
  comp["T_star"] = plan.Tstar;
  comp["t_a"] = plan.t_a;
  comp["t_b"] = plan.t_b;
  comp["t_c"] = plan.t_c;
  comp["w1"] = plan.w1;
  comp["w2"] = plan.w2;
  comp["bound_C1_total"] = plan.bound_C1_total;
  comp["claimed_total"] = plan.claimed_total;
  j["composition"] = std::move(comp);
  j["certificate_stage_a"] = certificate_to_json(plan.stage_a.cert);
  j["certificate_stage_c"] = certificate_to_json(plan.stage_c.cert);
  j["certificate_checks_stage_a"] = conditions_to_json(vr.stage_a.certificate);
  j["certificate_checks_stage_c"] = conditions_to_json(vr.stage_c.certificate);
  j["bounds"] = conditions_to_json(vr.bounds);

  ojson term;
  term["sup_error_stage_a"] = vr.stage_a.terminal_sup_error;
  term["sup_error_stage_c"] = vr.stage_c.terminal_sup_error;
  term["sup_error_total"] = vr.terminal_sup_error;
  term["tol"] = s.tol;
  term["pass"] = vr.terminal_sup_error <= s.tol;
  j["terminal"] = std::move(term);

  ojson blow;
  for (const auto& [tag, rep] :
       {std::pair{"stage_a", &vr.stage_a.blowup}, {"stage_c", &vr.stage_c.blowup}}) {
    blow[tag] = {{"bound", detail::json_number(rep->bound)},
                 {"min_inverse", detail::json_number(rep->min_inverse)},
                 {"two_sided_checked", rep->two_sided_checked},
                 {"one_sided_checked", rep->one_sided_checked},
                 {"pass", rep->ok}};
  }
  j["no_blowup"] = std::move(blow);

  j["T_bar_psi"] = detail::json_number(boundary_control_time(s.model, s.psi, s.a, s.b));

  if (fv_dx) {
    const StageFVReport fa = verify_stage_fv(plan.stage_a, *fv_dx);
    const StageFVReport fc = verify_stage_fv(plan.stage_c, *fv_dx);
    ojson fv;
    fv["dx"] = *fv_dx;
    fv["stage_a_terminal_l1"] = fa.terminal_l1;
    fv["stage_c_terminal_l1"] = fc.terminal_l1;
    fv["max_tv_increase"] = std::max(fa.max_tv_increase, fc.max_tv_increase);
    fv["max_conservation_defect"] =
        std::max(fa.conservation_defect, fc.conservation_defect);
    j["fv_cross_check"] = std::move(fv);
  }

  bool certs_ok = true;
  for (const auto* checks : {&vr.stage_a.certificate, &vr.stage_c.certificate})
    for (const CheckedCondition& c : *checks) certs_ok = certs_ok && c.ok;
  res.pass = (v.holds || force) && vr.bounds_ok && certs_ok &&
             vr.terminal_sup_error <= s.tol;
  j["pass"] = res.pass;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(std::filesystem::path(out_dir) / "snapshots");
    write_file_atomic((std::filesystem::path(out_dir) / "control.json").string(),
                      control_to_json(h).dump(2) + "\n");
    auto stage_times = [](double dur) {
      return std::vector<double>{0.0, 0.25 * dur, 0.5 * dur, 0.75 * dur, dur};
    };
    write_snapshot_csv(sol_a, stage_times(plan.t_a), 401,
                       (std::filesystem::path(out_dir) / "snapshots/stage_a.csv").string());
    write_snapshot_csv(sol_c, stage_times(plan.t_c), 401,
                       (std::filesystem::path(out_dir) / "snapshots/stage_c.csv").string());
    write_report(j, out_dir);
  }
  return res;
}

inline CommandResult run_trace(const Scenario& s, const std::string& out_dir) {
  CommandResult res;
  ojson& j = res.report;
  j["schema"] = 1;
  j["command"] = "trace";
  j["scenario"] = s.name;

  const HypothesisVerdict v =
      check_hypotheses(s.theorem, s.model, s.ubar, s.psi, s.I1p, s.I2p, s.T, s.rho);
  res.hypothesis_ok = v.holds;
  if (!v.holds) {
    j["hypotheses"] = verdict_to_json(v);
    j["pass"] = false;
    res.pass = false;
    write_report(j, out_dir);
    return res;
  }

  const ProfileC1& ubar = Scenario::as_c1(s.ubar, "ubar");
  const ProfileC1& psi = Scenario::as_c1(s.psi, "psi");
  auto [h, plan] =
      compose_full_control(s.model, ubar, psi, s.T, s.rho, s.I1p, s.I2p, s.mode());
  const ClassicalOptions copt{s.grid.fan_points, s.grid.time_steps, 1e10, std::nullopt};
  const ClassicalSolution sol_a = solve_classical(
      plan.stage_a.model, plan.stage_a.cert.ext, plan.stage_a.signal, plan.t_a, copt);
  const ClassicalSolution sol_c = solve_classical(
      plan.stage_c.model, plan.stage_c.cert.ext, plan.stage_c.signal, plan.t_c, copt);
  const ComposedTraces tr = composed_traces(plan, sol_a, sol_c);

  j["samples"] = tr.t.size();
  j["endpoint_error_a"] = std::abs(tr.u_a.back() - psi.eval(s.a));
  j["endpoint_error_b"] = std::abs(tr.u_b.back() - psi.eval(s.b));
  j["pass"] = true;

  if (!out_dir.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "t,u_a,u_b\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i)
      csv << tr.t[i] << ',' << tr.u_a[i] << ',' << tr.u_b[i] << '\n';
    std::filesystem::create_directories(out_dir);
    write_file_atomic((std::filesystem::path(out_dir) / "trace.csv").string(), csv.str());
    write_report(j, out_dir);
  }
  return res;
}

inline CommandResult run_bv(const Scenario& s, const std::vector<int>& ns, double dx,
                            const std::string& out_dir) {
  CommandResult res;
  ojson& j = res.report;
  j["schema"] = 1;
  j["command"] = "bv";
  j["scenario"] = s.name;
  j["flux"] = s.flux_name;
  j["dx"] = dx;

  const BVReport rep =
      run_bv_pipeline(s.model, s.ubar, s.psi, s.T, s.rho, s.I1p, s.I2p, ns, dx);
  j["hypotheses"] = verdict_to_json(rep.verdict);
  res.hypothesis_ok = rep.verdict.holds;

  j["rows"] = ojson::array();
  for (const BVRow& r : rep.rows) {
    ojson row;
    row["n"] = r.n;
    row["moll_err_ubar"] = r.moll_err_ubar;
    row["moll_err_psi"] = r.moll_err_psi;
    row["stage_a_l1"] = r.stage_a_l1;
    row["stage_c_l1"] = r.stage_c_l1;
    row["terminal_l1"] = r.terminal_l1;
    row["budget"] = r.budget;
    row["h_measured"] = r.h_measured;
    row["h_claimed"] = r.h_claimed;
    row["u_sup_measured"] = r.u_sup_measured;
    row["u_sup_claimed"] = r.u_sup_claimed;
    row["u_tv_measured"] = r.u_tv_measured;
    row["u_tv_claimed"] = r.u_tv_claimed;
    row["pass"] = r.pass;
    j["rows"].push_back(std::move(row));
  }
  j["cauchy_gaps"] = rep.cauchy_gaps;
  res.pass = rep.pass;
  j["pass"] = res.pass;
  write_report(j, out_dir);
  return res;
}

}  // namespace claw
