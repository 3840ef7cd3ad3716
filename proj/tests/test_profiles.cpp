#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "claw/profile.hpp"
#include "claw/quadrature.hpp"

using namespace claw;

namespace {

const double pi = std::acos(-1.0);

ProfileC1 sine_profile(double amp, double freq, double a, double b, int n = 513) {
  return ProfileC1::from_function([=](double x) { return amp * std::sin(freq * x); },
                                  [=](double x) { return amp * freq * std::cos(freq * x); },
                                  a, b, n);
}

}  // namespace

TEST_CASE("C1 profile evaluation matches the sampled function") {
  auto p = sine_profile(1.0, 2.0, 0.0, 1.0, 257);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> xs(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double x = xs(rng);
    REQUIRE(p.eval(x) == Catch::Approx(std::sin(2 * x)).margin(1e-8));
    REQUIRE(p.deriv(x) == Catch::Approx(2 * std::cos(2 * x)).margin(1e-6));
  }
}

TEST_CASE("exact extrema and variations of a sine arch") {
  auto p = ProfileC1::from_function([](double x) { return std::sin(2 * pi * x); },
                                    [](double x) { return 2 * pi * std::cos(2 * pi * x); },
                                    0.0, 1.0, 513);
  auto im = p.image();
  REQUIRE(im.lo == Catch::Approx(-1.0).margin(1e-8));
  REQUIRE(im.hi == Catch::Approx(1.0).margin(1e-8));
  REQUIRE(p.deriv_min() == Catch::Approx(-2 * pi).margin(1e-5));
  REQUIRE(p.deriv_max() == Catch::Approx(2 * pi).margin(1e-5));
  REQUIRE(p.sup_pos_deriv() == Catch::Approx(2 * pi).margin(1e-5));
  REQUIRE(p.sup_neg_deriv() == Catch::Approx(2 * pi).margin(1e-5));

  auto r = variation_report(p);
  REQUIRE(r.tv == Catch::Approx(4.0).margin(1e-7));
  REQUIRE(r.tv_neg == Catch::Approx(2.0).margin(1e-7));
  REQUIRE(r.tv_pos == Catch::Approx(2.0).margin(1e-7));
  REQUIRE(r.sup_norm == Catch::Approx(1.0).margin(1e-8));
  REQUIRE(r.tv <= 2.0 * (r.sup_norm + r.tv_neg) + 1e-9);
}

TEST_CASE("variation of monotone and constant profiles") {
  auto inc = ProfileC1::from_function([](double x) { return x * x; },
                                      [](double x) { return 2 * x; }, 0.0, 1.0, 65);
  auto ri = variation_report(inc);
  REQUIRE(ri.tv_neg == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(ri.tv == Catch::Approx(1.0).margin(1e-10));

  auto c = ProfileC1::constant(-0.7, 0.0, 2.0);
  auto rc = variation_report(c);
  REQUIRE(rc.tv == 0.0);
  REQUIRE(rc.tv_neg == 0.0);
  REQUIRE(rc.tv_pos == 0.0);
  REQUIRE(rc.sup_norm == Catch::Approx(0.7));
}

TEST_CASE("reflection duality") {
  auto p = sine_profile(0.5, 3.0, 0.0, 2.0);
  auto q = p.reflected();
  for (double x : {0.0, 0.3, 0.77, 1.5, 2.0})
    REQUIRE(q.eval(x) == Catch::Approx(p.eval(2.0 - x)).margin(1e-12));
  REQUIRE(q.sup_pos_deriv() == Catch::Approx(p.sup_neg_deriv()).margin(1e-9));

  // BV: an upward jump reflects into a downward jump
  ProfileBV bv(std::vector<ProfileC1>{ProfileC1::constant(0.0, 0.0, 0.5),
                                      ProfileC1::constant(1.0, 0.5, 2.0)});
  REQUIRE(std::isinf(bv.d_plus()));
  REQUIRE(bv.d_minus() == 0.0);
  auto rbv = bv.reflected();
  REQUIRE(std::isinf(rbv.d_minus()));
  REQUIRE(rbv.d_plus() == 0.0);
  REQUIRE(rbv.eval(0.3) == Catch::Approx(1.0));
  REQUIRE(rbv.eval(1.8) == Catch::Approx(0.0));
}

TEST_CASE("BV profile accounting") {
  // rising piece, downward jump, falling piece
  auto p1 = ProfileC1::from_function([](double x) { return x; }, [](double) { return 1.0; },
                                     0.0, 0.5, 9);
  auto p2 = ProfileC1::from_function([](double x) { return 0.2 - 0.1 * (x - 0.5); },
                                     [](double) { return -0.1; }, 0.5, 1.0, 9);
  ProfileBV p(std::vector<ProfileC1>{p1, p2});

  REQUIRE(p.jump_sizes().size() == 1);
  REQUIRE(p.jump_sizes()[0] == Catch::Approx(-0.3));
  REQUIRE(p.total_variation() == Catch::Approx(0.5 + 0.3 + 0.05).margin(1e-10));
  REQUIRE(std::isinf(p.d_minus()));  // downward jump
  REQUIRE(p.d_plus() == Catch::Approx(1.0));

  auto r = variation_report(p);
  REQUIRE(r.tv == Catch::Approx(0.85).margin(1e-10));
  REQUIRE(r.tv_neg == Catch::Approx(0.35).margin(1e-10));
  REQUIRE(r.tv_pos == Catch::Approx(0.5).margin(1e-10));

  // left-continuous at the jump
  REQUIRE(p.eval(0.5) == Catch::Approx(0.5));
  REQUIRE(p.eval(0.5 + 1e-9) == Catch::Approx(0.2).margin(1e-6));
}

TEST_CASE("constant profile extends to itself") {
  auto c = ProfileC1::constant(0.4, 0.0, 1.0);
  auto ext = extend_profile(c, 0.1, 1.0, SideRule::two_sided);
  REQUIRE(ext.alpha_minus == Catch::Approx(0.4));
  REQUIRE(ext.alpha_plus == Catch::Approx(0.4));
  for (double x : {-5.0, -0.05, 0.5, 1.02, 7.0})
    REQUIRE(ext.eval(x) == Catch::Approx(0.4).margin(1e-12));
}

TEST_CASE("linear profile bridges stay within the Hermite slope bound") {
  auto p = ProfileC1::from_function([](double x) { return x; }, [](double) { return 1.0; },
                                    0.0, 1.0, 17);
  auto ext = extend_profile(p, 0.1, 12.0, SideRule::two_sided);
  REQUIRE(ext.alpha_minus == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(ext.alpha_plus == Catch::Approx(1.0).margin(1e-12));

  // sample the bridges densely: zero value offset keeps |slope| <= 2.5
  double dmax = 0.0;
  for (int i = 0; i <= 2000; ++i) {
    const double x = -0.1 + 1.2 * i / 2000.0;
    dmax = std::max(dmax, std::abs(ext.deriv(x)));
  }
  REQUIRE(dmax <= 2.5);

  // C1 junctions
  REQUIRE(ext.full.eval(0.0) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(ext.full.deriv(0.0) == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(ext.full.deriv(-0.1) == Catch::Approx(0.0).margin(1e-9));

  // factor-2 bounds of the extension
  auto ri = variation_report(p);
  auto re = variation_report(ext.full);
  REQUIRE(re.sup_norm <= 2.0 * ri.sup_norm + 1e-12);
  REQUIRE(re.tv <= 2.0 * ri.tv + 1e-12);
}

TEST_CASE("one-sided extension of a steep increasing profile needs headroom") {
  // slope 4 at both ends; lower_only bound 1: the equal-value bridge dips at
  // -4/3 < -1, so the plateau must move outside Im(p) into the state interval
  auto p = ProfileC1::from_function([](double x) { return 4.0 * x; },
                                    [](double) { return 4.0; }, 0.0, 1.0, 17);
  auto ext = extend_profile(p, 0.1, 1.0, SideRule::lower_only, Interval(-2.0, 6.0));
  double dmin = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double x = -0.1 + 1.2 * i / 4000.0;
    dmin = std::min(dmin, ext.deriv(x));
  }
  REQUIRE(dmin >= -1.0 - 1e-9);

  // without headroom the same request is infeasible
  REQUIRE_THROWS_AS(extend_profile(p, 0.1, 1.0, SideRule::lower_only, Interval(0.0, 4.0)),
                    ExtensionInfeasible);
}

TEST_CASE("mollification of a downward step") {
  ProfileBV step(std::vector<ProfileC1>{ProfileC1::constant(1.0, 0.0, 0.5),
                                        ProfileC1::constant(0.0, 0.5, 1.0)});
  auto phi = mollify_one_sided(step, 1.0, 100);

  REQUIRE(phi.deriv_max() < 1.0);
  REQUIRE(phi.image().lo >= -1e-5);
  REQUIRE(phi.image().hi <= 1.0 + 1e-5);
  REQUIRE(l1_distance(step, phi) <= 0.02);

  // oracle: direct convolution quadrature at a few points
  const double r = 0.01;
  const double mass = integrate_gl64(
      [](double t) { return std::exp(-1.0 / (1.0 - t * t)); }, -1.0 + 1e-12, 1.0 - 1e-12);
  for (double x : {0.3, 0.497, 0.5, 0.503, 0.8}) {
    const double direct = integrate(
        [&](double y) {
          const double t = y / r;
          const double k = std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) / (mass * r) : 0.0;
          return k * step.eval(std::min(std::max(x - y, 0.0), 1.0));
        },
        -r, r, 1e-12);
    REQUIRE(phi.eval(x) == Catch::Approx(direct).margin(1e-6));
  }
}

TEST_CASE("mollification preserves a C1 profile in the limit") {
  auto base = sine_profile(0.3, 2.0, 0.0, 1.0, 129);
  ProfileBV p(base);
  double prev_err = kInf;
  for (int n : {25, 50, 100, 200}) {
    auto phi = mollify_one_sided(p, 1.0, n);
    REQUIRE(phi.deriv_max() < 1.0);
    const double err = l1_distance(p, phi);
    REQUIRE(err < prev_err + 1e-12);
    prev_err = err;
  }
  REQUIRE(prev_err < 2e-4);
}

TEST_CASE("mollification rejects forbidden jumps") {
  ProfileBV up(std::vector<ProfileC1>{ProfileC1::constant(0.0, 0.0, 0.5),
                                      ProfileC1::constant(1.0, 0.5, 1.0)});
  REQUIRE_THROWS_AS(mollify_one_sided(up, 1.0, 50), OneSidedViolation);
  // lower-sided variant accepts it and flips roles
  auto phi = mollify_one_sided_lower(up, 1.0, 50);
  REQUIRE(phi.deriv_min() > -1.0);

  ProfileBV down(std::vector<ProfileC1>{ProfileC1::constant(1.0, 0.0, 0.5),
                                        ProfileC1::constant(0.0, 0.5, 1.0)});
  REQUIRE_THROWS_AS(mollify_one_sided_lower(down, 1.0, 50), OneSidedViolation);
}

TEST_CASE("mollification error decays like 1/n on random BV data") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> U(0.1, 0.9);
  for (int trial = 0; trial < 20; ++trial) {
    // two smooth pieces joined by a downward jump (admissible for upper rule)
    const double xj = U(rng);
    const double hi = 0.5 + 0.4 * U(rng);
    const double lo = hi - 0.2 - 0.3 * U(rng);
    const double s = 0.4 * U(rng);  // gentle slopes, below M = 1
    auto p1 = ProfileC1::from_function([=](double x) { return hi + s * std::sin(3 * x); },
                                       [=](double x) { return 3 * s * std::cos(3 * x); },
                                       0.0, xj, 33);
    auto p2 = ProfileC1::from_function([=](double x) { return lo + s * std::sin(3 * x); },
                                       [=](double x) { return 3 * s * std::cos(3 * x); },
                                       xj, 1.0, 33);
    ProfileBV p(std::vector<ProfileC1>{p1, p2});
    if (p.d_plus() >= 2.0) continue;

    auto c25 = mollify_one_sided(p, 2.0, 25);
    auto c50 = mollify_one_sided(p, 2.0, 50);
    REQUIRE(c25.deriv_max() < 2.0);
    REQUIRE(c50.deriv_max() < 2.0);
    const double e25 = l1_distance(p, c25);
    const double e50 = l1_distance(p, c50);
    REQUIRE(e50 <= e25 / 2.0 * 1.5);  // halving the width at least halves, up to 1.5x
  }
}
