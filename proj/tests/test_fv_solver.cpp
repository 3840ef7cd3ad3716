#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "claw/characteristics.hpp"
#include "claw/fv_solver.hpp"

using namespace claw;

namespace {

const double pi = std::acos(-1.0);

ProfileC1 gentle_profile(double base, double amp, double a = 0.0, double b = 1.0) {
  return ProfileC1::from_function(
      [=](double x) { return base + amp * std::sin(pi * (x - a) / (b - a)); },
      [=](double x) { return amp * pi / (b - a) * std::cos(pi * (x - a) / (b - a)); }, a, b,
      257);
}

ProfileBV shock_riemann() {
  return ProfileBV({ProfileC1::constant(1.0, -1.0, 0.0), ProfileC1::constant(0.0, 0.0, 2.0)});
}

double shock_l1_error(double dx, FVRun* out = nullptr) {
  const FluxModel burgers = builtin_flux("burgers");
  FVOptions opt;
  opt.entropy_ks = {0.25, 0.5, 0.75};
  opt.entropy_stride = 4;
  FVRun run = solve_fv(burgers, shock_riemann(), zero_control(1.0), 1.0, dx, opt);
  auto exact = [](double x) { return x < 0.5 ? 1.0 : 0.0; };
  const double err = run.l1_against(run.u_final, exact, Interval(-1.0, 2.0));
  if (out) *out = std::move(run);
  return err;
}

}  // namespace

TEST_CASE("burgers shock Riemann problem: accuracy, order, TV, entropy") {
  FVRun fine;
  const double e4 = shock_l1_error(4e-3);
  const double e2 = shock_l1_error(2e-3);
  const double e1 = shock_l1_error(1e-3, &fine);

  REQUIRE(e1 <= 5e-3);
  REQUIRE(e4 / e2 >= 1.7);
  REQUIRE(e4 / e2 <= 2.3);
  REQUIRE(e2 / e1 >= 1.7);
  REQUIRE(e2 / e1 <= 2.3);

  REQUIRE(fine.max_tv_increase <= 1e-12);
  REQUIRE(discrete_entropy_check(fine, EntropyFamily::kruzhkov_k, {0.25, 0.5, 0.75}) <=
          1e-3);
  REQUIRE(fine.max_conservation_defect <= 1e-10);

  // untracked entropy constants are rejected
  REQUIRE_THROWS_AS(discrete_entropy_check(fine, EntropyFamily::kruzhkov_k, {0.1}),
                    ConfigError);
}

TEST_CASE("constant data with a source is advanced exactly") {
  const FluxModel burgers = builtin_flux("burgers");
  ProfileBV ubar(ProfileC1::constant(0.3, 0.0, 1.0));
  ControlSignal h({ControlPiece{0.0, 0.5, 0.0, 0.4}, ControlPiece{0.5, 1.0, 0.2, -0.4}});
  FVOptions opt;
  opt.entropy_ks = {0.0, 0.3};
  FVRun run = solve_fv(burgers, ubar, h, 1.0, 0.01, opt);

  const double expect = 0.3 + h.total_integral();
  for (double v : run.u_final) REQUIRE(v == Catch::Approx(expect).margin(1e-13));
  for (double tv : run.tv_history) REQUIRE(tv <= 1e-13);
  REQUIRE(discrete_entropy_check(run, EntropyFamily::kruzhkov_k, {0.0, 0.3}) <= 1e-13);
  REQUIRE(verify_terminal(run, [=](double) { return expect; }) <= 1e-12);
}

TEST_CASE("seeded expansion shock is rarefied, not sustained") {
  const FluxModel burgers = builtin_flux("burgers");
  ProfileBV ubar({ProfileC1::constant(-0.5, -1.0, 0.0), ProfileC1::constant(0.5, 0.0, 1.0)});
  FVOptions opt;
  opt.entropy_ks = {-0.25, 0.0, 0.25};
  opt.entropy_stride = 2;
  FVRun run = solve_fv(burgers, ubar, zero_control(0.5), 0.5, 2e-3, opt);

  auto exact = [](double x) {
    const double t = 0.5;
    if (x <= -0.5 * t) return -0.5;
    if (x >= 0.5 * t) return 0.5;
    return x / t;
  };
  const double err = run.l1_against(run.u_final, exact, Interval(-1.0, 1.0));
  REQUIRE(err <= 0.02);
  REQUIRE(discrete_entropy_check(run, EntropyFamily::kruzhkov_k, {-0.25, 0.0, 0.25}) <=
          1e-3);
  // the midpoint of the fan is near zero, not the seeded discontinuity
  const FVSnapshot& last = run.snapshots.back();
  std::size_t mid = 0;
  while (run.cell_center(mid) < 0.0) ++mid;
  REQUIRE(std::abs(last.u[mid]) <= 0.05);
}

TEST_CASE("FV agrees with characteristics at first order on a steering run") {
  const FluxModel f1 = builtin_flux("lwr_greenshields");
  ProfileC1 ubar = gentle_profile(0.3, 0.04);
  auto cert = select_parameters(f1, ubar, Interval(0.0, 0.75), 2.5, 0.0,
                                SelectionMode::full_bound, 0.25);
  ControlSignal h = build_null_control(cert, 2.5);
  auto csol = solve_classical(f1, cert.ext, h, 2.5);
  // compare while the plateau is still sweeping across [a,b] (later the
  // solution is constant there and both solvers are exact)
  ProfileC1 mid = csol.profile_at(0.35);
  auto mid_ref = [&](double x) { return mid.eval(x); };

  FVOptions opt;
  opt.snapshot_times = {0.35, 1.0, 1.25, 2.0};
  FVRun run4 = solve_fv(f1, cert.ext, h, 2.5, 4e-3, opt);
  FVRun run2 = solve_fv(f1, cert.ext, h, 2.5, 2e-3, opt);

  const double err4 =
      run4.l1_against(run4.snapshot_near(0.35).u, mid_ref, Interval(0.0, 1.0));
  const double err2 =
      run2.l1_against(run2.snapshot_near(0.35).u, mid_ref, Interval(0.0, 1.0));
  REQUIRE(err4 <= 0.02);
  REQUIRE(err2 < err4);
  const double ratio = err4 / err2;
  REQUIRE(ratio >= 1.5);
  REQUIRE(ratio <= 2.6);

  // terminal constant reached within first-order accuracy
  REQUIRE(verify_terminal(run2, [](double) { return 0.25; }) <= 0.01);

  // TV(u(t)) <= TV(ubar_ext) throughout (hyperbolic sub-steps are TVD and the
  // source shifts ghosts and cells alike)
  const double tv0 = cert.ext.full.total_variation();
  const double tv_max = *std::max_element(run4.tv_history.begin(), run4.tv_history.end());
  REQUIRE(tv_max <= tv0 + 1e-10);
  REQUIRE(run4.max_tv_increase <= 1e-12);

  // L1-in-time Lipschitz estimate with L = ||f'|| TV + |window| ||h||
  const double S = sup_norm_on(f1, DerivOrder::df, f1.domain);
  const double L = S * tv0 + run4.window.length() * h.sup_norm();
  for (std::size_t s = 0; s + 1 < run4.snapshots.size(); ++s) {
    const FVSnapshot& s1 = run4.snapshots[s];
    const FVSnapshot& s2 = run4.snapshots[s + 1];
    double dist = 0.0;
    for (std::size_t i = 0; i < s1.u.size(); ++i)
      dist += std::abs(s2.u[i] - s1.u[i]) * run4.dx;
    REQUIRE(dist <= L * (s2.t - s1.t) * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("a window that the shock reaches is rejected") {
  const FluxModel burgers = builtin_flux("burgers");
  FVOptions opt;
  opt.window = Interval(-0.5, 0.5);
  REQUIRE_THROWS_AS(solve_fv(burgers, shock_riemann(), zero_control(1.5), 1.5, 5e-3, opt),
                    WindowTooSmall);
}

TEST_CASE("CFL misconfiguration and dt underflow are rejected") {
  const FluxModel burgers = builtin_flux("burgers");
  ProfileBV ubar(ProfileC1::constant(0.3, 0.0, 1.0));
  FVOptions bad;
  bad.cfl = 0.6;
  REQUIRE_THROWS_AS(solve_fv(burgers, ubar, zero_control(1.0), 1.0, 0.01, bad),
                    ConfigError);

  FluxModel stiff;
  stiff.name = "stiff";
  stiff.domain = Interval(-kInf, kInf);
  stiff.eval_f = [](double u) { return 1e16 * u; };
  stiff.eval_df = [](double) { return 1e16; };
  stiff.eval_d2f = [](double) { return 0.0; };
  stiff.shape = FluxShape::convex;
  FVOptions opt;
  opt.window = Interval(-1.0, 2.0);  // automatic rule would hit the norm guard
  REQUIRE_THROWS_AS(solve_fv(stiff, ubar, zero_control(1.0), 1.0, 0.01, opt),
                    StepFailure);
}
