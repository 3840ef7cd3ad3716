#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "claw/characteristics.hpp"

using namespace claw;

namespace {

const double pi = std::acos(-1.0);

ProfileC1 gentle_profile(double base, double amp, double a = 0.0, double b = 1.0) {
  return ProfileC1::from_function(
      [=](double x) { return base + amp * std::sin(pi * (x - a) / (b - a)); },
      [=](double x) { return amp * pi / (b - a) * std::cos(pi * (x - a) / (b - a)); }, a, b,
      257);
}

// Direct RK4 integration of the Riccati ODE z1' = -f''(z0(t)) z1^2.
double rk4_z1(const FluxModel& model, const ControlSignal& h, double u0, double du0,
              double T, int steps) {
  double z = du0;
  const double dt = T / steps;
  auto rhs = [&](double t, double z1) {
    const double z0 = u0 + h.primitive(t);
    return -model.d2f(z0) * z1 * z1;
  };
  for (int i = 0; i < steps; ++i) {
    const double t = i * dt;
    const double k1 = rhs(t, z);
    const double k2 = rhs(t + 0.5 * dt, z + 0.5 * dt * k1);
    const double k3 = rhs(t + 0.5 * dt, z + 0.5 * dt * k2);
    const double k4 = rhs(t + dt, z + dt * k3);
    z += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return z;
}

}  // namespace

TEST_CASE("burgers rarefaction ubar(x) = x evolves as x/(1+t)") {
  const FluxModel burgers = builtin_flux("burgers");
  ProfileC1 ubar = ProfileC1::from_function([](double x) { return x; },
                                            [](double) { return 1.0; }, 0.0, 1.0, 33);
  ExtendedProfile ext = extend_profile(ubar, 0.25, 4.0, SideRule::two_sided);
  auto sol = solve_classical(burgers, ext, zero_control(1.5), 1.5);

  // initial data reproduced exactly (fan knots include the profile knots)
  REQUIRE(sol.eval(0.0, 0.437) == Catch::Approx(0.437).margin(1e-12));

  for (double t : {0.5, 1.0, 1.4}) {
    ProfileC1 p = sol.profile_at(t);
    for (double x : {0.3, 0.45, 0.6}) {
      REQUIRE(p.eval(x) == Catch::Approx(x / (1.0 + t)).margin(1e-9));
      REQUIRE(p.deriv(x) == Catch::Approx(1.0 / (1.0 + t)).margin(1e-9));
    }
  }

  // convex flux, du0 > 0: z1 positive and decreasing along the characteristic
  std::size_t j = 0;
  while (sol.foot_points()[j] < 0.5) ++j;
  double prev = sol.z1_at(0, j);
  REQUIRE(prev == Catch::Approx(1.0).margin(1e-12));
  for (std::size_t it = 1; it < sol.times().size(); it += 16) {
    const double z1 = sol.z1_at(it, j);
    REQUIRE(z1 == Catch::Approx(1.0 / (1.0 + sol.times()[it])).margin(1e-9));
    REQUIRE(z1 > 0.0);
    REQUIRE(z1 < prev);
    prev = z1;
  }

  REQUIRE(sol.non_crossing());
  REQUIRE_THROWS_AS(sol.eval(1.0, sol.window().hi + 5.0), WindowTooSmall);
}

TEST_CASE("burgers compression ubar(x) = -x blows up at t = 1") {
  const FluxModel burgers = builtin_flux("burgers");
  ProfileC1 ubar = ProfileC1::from_function([](double x) { return -x; },
                                            [](double) { return -1.0; }, 0.0, 1.0, 33);
  ExtendedProfile ext = extend_profile(ubar, 0.25, 4.0, SideRule::two_sided);
  try {
    solve_classical(burgers, ext, zero_control(1.5), 1.5);
    FAIL("expected BlowUp");
  } catch (const BlowUp& e) {
    REQUIRE(e.t == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("constant data with h = 1: u(t,x) = t and x(t) = x0 + t^2/2") {
  const FluxModel burgers = builtin_flux("burgers");
  ExtendedProfile ext =
      extend_profile(ProfileC1::constant(0.0, 0.0, 1.0), 0.25, 1.0, SideRule::two_sided);
  ControlSignal h({ControlPiece{0.0, 1.0, 1.0, 0.0}});
  auto sol = solve_classical(burgers, ext, h, 1.0);

  REQUIRE(sol.eval(0.8, 0.5) == Catch::Approx(0.8).margin(1e-10));
  ProfileC1 p = sol.profile_at(0.8);
  for (std::size_t j = 0; j < sol.foot_points().size(); j += 100)
    REQUIRE(p.knots_x()[j] ==
            Catch::Approx(sol.foot_points()[j] + 0.5 * 0.8 * 0.8).margin(1e-10));

  for (TraceSide side : {TraceSide::left, TraceSide::right}) {
    TraceSeries s = trace(sol, side);
    REQUIRE(s.t.size() == sol.times().size());
    for (std::size_t it = 0; it < s.t.size(); ++it)
      REQUIRE(s.u[it] == Catch::Approx(s.t[it]).margin(1e-10));
  }
}

TEST_CASE("snapshot and fan CSV dumps are written atomically with headers") {
  const FluxModel burgers = builtin_flux("burgers");
  ExtendedProfile ext =
      extend_profile(ProfileC1::constant(0.0, 0.0, 1.0), 0.25, 1.0, SideRule::two_sided);
  ControlSignal h({ControlPiece{0.0, 1.0, 1.0, 0.0}});
  auto sol = solve_classical(burgers, ext, h, 1.0,
                             ClassicalOptions{101, 16, 1e10, std::nullopt});

  const auto dir = std::filesystem::temp_directory_path();
  const std::string snap = (dir / "claw_test_snapshot.csv").string();
  const std::string fan = (dir / "claw_test_fan.csv").string();
  write_snapshot_csv(sol, {0.0, 0.5, 1.0}, 11, snap);
  write_fan_csv(sol, fan, 4, 50);

  std::ifstream in(snap);
  std::string line;
  REQUIRE(std::getline(in, line));
  REQUIRE(line == "t,x,u");
  int rows = 0;
  double last_u = -1.0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream ss(line);
    double t, x, u;
    char c1, c2;
    REQUIRE((ss >> t >> c1 >> x >> c2 >> u));
    last_u = u;
  }
  REQUIRE(rows == 3 * 11);
  REQUIRE(last_u == Catch::Approx(1.0).margin(1e-10));  // u(1, b) = 1

  std::ifstream fin(fan);
  REQUIRE(std::getline(fin, line));
  REQUIRE(line == "x0,t,x,z0,z1");
  REQUIRE(std::getline(fin, line));  // at least one data row

  std::remove(snap.c_str());
  std::remove(fan.c_str());
}

TEST_CASE("closed-form Riccati state matches direct ODE integration") {
  const FluxModel f3 = builtin_flux("kynch_mw");  // f'' = 4 - 6u, nonconstant
  ProfileC1 ubar = ProfileC1::from_function(
      [](double x) { return 0.3 + 0.05 * std::sin(2.0 * pi * x); },
      [](double x) { return 0.1 * pi * std::cos(2.0 * pi * x); }, 0.0, 1.0, 257);
  ExtendedProfile ext =
      extend_profile(ubar, 0.25, 1.0, SideRule::two_sided, Interval(0.0, 1.0));
  ControlSignal h({ControlPiece{0.0, 0.5, 0.0, 0.3}, ControlPiece{0.5, 1.0, 0.15, -0.3}});
  auto sol = solve_classical(f3, ext, h, 1.0);

  std::mt19937 rng(987654321);
  std::uniform_int_distribution<std::size_t> pick(0, sol.foot_points().size() - 1);
  const std::size_t last = sol.times().size() - 1;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t j = pick(rng);
    const double closed = sol.z1_at(last, j);
    const double ode =
        rk4_z1(f3, h, sol.foot_values()[j], sol.foot_slopes()[j], 1.0, 10000);
    REQUIRE(std::abs(closed - ode) <= 1e-7 * std::max(1e-12, std::abs(ode)));
  }
}

TEST_CASE("synthesized null control steers to the constant target") {
  const FluxModel f1 = builtin_flux("lwr_greenshields");
  ProfileC1 ubar = gentle_profile(0.3, 0.04);
  auto cert = select_parameters(f1, ubar, Interval(0.0, 0.75), 2.5, 0.0,
                                SelectionMode::full_bound, 0.25);
  ControlSignal h = build_null_control(cert, 2.5);
  auto sol = solve_classical(f1, cert.ext, h, 2.5);

  // terminal state is the constant w* on [a,b]
  ProfileC1 pT = sol.profile_at(2.5);
  for (int i = 0; i <= 40; ++i) {
    const double x = i / 40.0;
    REQUIRE(std::abs(pT.eval(x) - 0.25) <= 1e-8);
  }

  // every characteristic landing in [a,b] at T1 has its foot in the
  // alpha-plateau left of a - eps1 (b-a)
  REQUIRE(cert.direction == MoveDirection::right_moving);
  ProfileC1 p1 = sol.profile_at(cert.T1);
  std::size_t landed = 0;
  for (std::size_t j = 0; j < sol.foot_points().size(); ++j) {
    const double x = p1.knots_x()[j];
    if (x < 0.0 || x > 1.0) continue;
    ++landed;
    REQUIRE(sol.foot_points()[j] < -cert.eps1 * 1.0 + 1e-9);
  }
  REQUIRE(landed > 10);

  // plateau phase: the left trace equals alpha + H(T1)
  REQUIRE(p1.eval(0.0) ==
          Catch::Approx(cert.alpha + h.primitive(cert.T1)).margin(1e-8));

  // Riccati certificate bound holds with positive margin
  BlowupBoundReport rep = verify_no_blowup_bound(sol, cert);
  REQUIRE(rep.ok);
  REQUIRE(rep.two_sided_checked);
  REQUIRE(rep.one_sided_checked);  // f1 is concave
  REQUIRE(rep.min_inverse > rep.bound);

  // conservation along characteristics: u(t, x(t;x0)) - H(t) = ubar(x0)
  std::size_t j = 0;
  while (sol.foot_points()[j] < 0.5) ++j;
  for (std::size_t it = 0; it < sol.times().size(); it += 32) {
    const double v = sol.value_at_index(it, sol.position(it, j));
    REQUIRE(v - h.primitive(sol.times()[it]) ==
            Catch::Approx(sol.foot_values()[j]).margin(1e-9));
  }

  REQUIRE(sol.non_crossing());
}

TEST_CASE("an explicitly narrowed window is detected as too small") {
  const FluxModel burgers = builtin_flux("burgers");
  ExtendedProfile ext =
      extend_profile(ProfileC1::constant(1.0, 0.0, 1.0), 0.25, 1.0, SideRule::two_sided);
  ClassicalOptions opt;
  opt.window = Interval(-0.2, 1.2);
  REQUIRE_THROWS_AS(solve_classical(burgers, ext, zero_control(1.0), 1.0, opt),
                    WindowTooSmall);
}
