#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <numbers>

#include "fermigas/model.hpp"
#include "fermigas/quadrature.hpp"

using namespace fermigas;
constexpr double pi = std::numbers::pi;

TEST_CASE("dimension accepts only 1 and 2") {
  CHECK_NOTHROW(Dimension(1));
  CHECK_NOTHROW(Dimension(2));
  CHECK_THROWS_AS(Dimension(3), ValidationError);
  CHECK_THROWS_AS(Dimension(0), ValidationError);
  try {
    Dimension(3);
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("dimension") != std::string::npos);
  }
}

TEST_CASE("constant conventions") {
  auto p1 = TFConstants::make(Dimension(1), ConstantsConvention::PaperLiteral);
  auto b1 = TFConstants::make(Dimension(1), ConstantsConvention::BathTubConsistent);
  auto p2 = TFConstants::make(Dimension(2), ConstantsConvention::PaperLiteral);
  auto b2 = TFConstants::make(Dimension(2), ConstantsConvention::BathTubConsistent);
  CHECK(p1.c_tf == doctest::Approx(pi * pi).epsilon(1e-15));
  CHECK(b1.c_tf == doctest::Approx(pi * pi / 3).epsilon(1e-15));
  CHECK(p2.c_tf == doctest::Approx(8 * pi).epsilon(1e-15));
  CHECK(b2.c_tf == doctest::Approx(2 * pi).epsilon(1e-15));
  CHECK(p1.c_d == doctest::Approx(pi));
  CHECK(p2.c_d == doctest::Approx(std::sqrt(4 * pi)));
  CHECK(constants_convention_from_string(to_string(ConstantsConvention::PaperLiteral)) ==
        ConstantsConvention::PaperLiteral);
  CHECK_THROWS_AS(constants_convention_from_string("nope"), ValidationError);
}

TEST_CASE("bath-tub kinetic density matches the closed-form ball integral") {
  // (2pi)^{-1} \int_{|p|<=pi r} p^2 = pi^2 r^3 / 3 ; (2pi)^{-2} \int_{|p|<=sqrt(4 pi r)} |p|^2 = 2 pi r^2
  for (double r : {0.0, 0.3, 1.0, 2.5}) {
    CHECK(lift_kinetic_density(Dimension(1), pi, r) == doctest::Approx(pi * pi * r * r * r / 3));
    CHECK(lift_kinetic_density(Dimension(2), std::sqrt(4 * pi), r) ==
          doctest::Approx(2 * pi * r * r));
  }
}

TEST_CASE("audit finds the convention mismatch") {
  auto a1 = audit_constants(Dimension(1));
  auto a2 = audit_constants(Dimension(2));
  CHECK(a1.probe_mass == doctest::Approx(1).epsilon(1e-6));
  CHECK(a1.tf_kinetic_bathtub == doctest::Approx(a1.lift_kinetic_bathtub).epsilon(1e-12));
  CHECK(a2.tf_kinetic_bathtub == doctest::Approx(a2.lift_kinetic_bathtub).epsilon(1e-12));
  CHECK(a1.mismatch_factor_paper == doctest::Approx(3).epsilon(1e-12));
  CHECK(a2.mismatch_factor_paper == doctest::Approx(4).epsilon(1e-12));

  SpatialGrid g(Dimension(1), 2, 64);
  auto z = audit_constants(DensityField::zeros(g));
  CHECK(z.tf_kinetic_paper == 0);
  CHECK(z.lift_kinetic_paper == 0);
  CHECK(z.tf_kinetic_bathtub == 0);
}

TEST_CASE("scaled indicator: N^{d beta} height on a shrunk support") {
  auto w = std::make_shared<InteractionProfile>(InteractionProfile::indicator(Dimension(1), 1, 1, 0.25));
  ScaledInteraction wn(w, 16);
  CHECK(wn.amplitude() == doctest::Approx(2));
  CHECK(wn.length() == doctest::Approx(0.5));
  CHECK(wn.radial(0.0) == doctest::Approx(2));
  CHECK(wn.radial(0.49) == doctest::Approx(2));
  CHECK(wn.radial(0.51) == 0);
  CHECK(wn.integral() == doctest::Approx(2).epsilon(1e-12));
  CHECK(w->integral() == doctest::Approx(2).epsilon(1e-12));
}

TEST_CASE("N = 1 leaves the profile unchanged") {
  auto w = std::make_shared<InteractionProfile>(InteractionProfile::bump(Dimension(1), 1.3, 0.7, 0.3));
  ScaledInteraction wn(w, 1);
  for (double r : {0.0, 0.1, 0.35, 0.69, 0.8}) CHECK(wn.radial(r) == doctest::Approx(w->radial(r)));
}

TEST_CASE("scaled bump keeps its integral in 2D") {
  auto w = std::make_shared<InteractionProfile>(InteractionProfile::bump(Dimension(2), 1, 1, 0.2));
  ScaledInteraction wn(w, 32);
  boost::math::quadrature::tanh_sinh<double> ts;
  double r = wn.support_radius();
  double scaled = ts.integrate([&](double s) { return 2 * pi * s * wn.radial(s); }, 0.0, r);
  double plain = ts.integrate([&](double s) { return 2 * pi * s * w->radial(s); }, 0.0, 1.0);
  CHECK(std::abs(scaled - plain) <= 1e-8);
  CHECK(std::abs(w->integral() - plain) <= 1e-8);
}

TEST_CASE("interaction validation") {
  CHECK_THROWS_AS(InteractionProfile::indicator(Dimension(1), 1, 1, 0.0), ValidationError);
  CHECK_THROWS_AS(InteractionProfile::indicator(Dimension(1), 1, 1, 1.0), ValidationError);
  CHECK_THROWS_AS(InteractionProfile::indicator(Dimension(2), 1, 1, 0.5), ValidationError);
  CHECK_THROWS_AS(InteractionProfile::indicator(Dimension(1), -1, 1, 0.1), ValidationError);
  auto lo = InteractionProfile::indicator(Dimension(1), 1, 1, 0.1);
  auto hi = InteractionProfile::indicator(Dimension(1), 1, 1, 0.8);
  CHECK(lo.beta_range() == BetaRange::Theorem);
  CHECK(hi.beta_range() == BetaRange::UpperBoundOnly);

  // d = 2 needs I_w < c_TF
  auto c2 = TFConstants::make(Dimension(2), ConstantsConvention::BathTubConsistent);
  auto weak = InteractionProfile::indicator(Dimension(2), 1.0, 1.0, 0.05);  // I = pi < 2 pi
  auto strong = InteractionProfile::indicator(Dimension(2), 3.0, 1.0, 0.05);
  CHECK_NOTHROW(weak.check_against(c2));
  CHECK_THROWS_AS(strong.check_against(c2), ValidationError);
  CHECK_THROWS_AS(ScaledInteraction(std::make_shared<InteractionProfile>(lo), 0.5), ValidationError);
}

TEST_CASE("indicator total variation and bump gradient norm") {
  auto ind = InteractionProfile::indicator(Dimension(1), 2, 1, 0.1);
  CHECK(ind.has_jumps());
  CHECK(ind.gradient_l1() == doctest::Approx(4));  // two jumps of height 2
  auto b = InteractionProfile::bump(Dimension(1), 1, 1, 0.1);
  // \int |w'| over [-1,1] = 2 (w(0) - w(1)) for a monotone radial profile
  CHECK(b.gradient_l1() == doctest::Approx(2).epsilon(1e-8));
}

TEST_CASE("trap potentials") {
  auto h = TrapPotential::harmonic(Dimension(2), 2.0);
  CHECK(h({1, 1}) == doctest::Approx(4));
  auto g = h.gradient({1, -0.5});
  CHECK(g[0] == doctest::Approx(4));
  CHECK(g[1] == doctest::Approx(-2));
  auto q = TrapPotential::quartic(Dimension(1));
  CHECK(q({2, 0}) == doctest::Approx(16));
  auto dw = TrapPotential::double_well(Dimension(1), 1.5, 1.0);
  CHECK(dw({1.5, 0}) == doctest::Approx(0));
  CHECK(dw({-1.5, 0}) == doctest::Approx(0));
  CHECK_THROWS_AS(TrapPotential::harmonic(Dimension(1), -1), ValidationError);

  // V unbounded below fails the growth probe
  GrowthBounds b;
  CHECK_THROWS_AS(TrapPotential(Dimension(1), "bad", [](const Point& x) { return -x[0] * x[0]; },
                                [](const Point& x) { return Point{-2 * x[0], 0}; }, b, true),
                  ValidationError);
}

TEST_CASE("grid and density basics") {
  SpatialGrid g(Dimension(1), 1.0, 4);
  CHECK(g.spacing() == doctest::Approx(0.5));
  CHECK(g.coordinate(0) == doctest::Approx(-0.75));
  DensityField rho(g, {1, 1, 1, 1});
  CHECK(rho.mass() == doctest::Approx(2));
  CHECK(rho.lp_norm_pow(2) == doctest::Approx(2));
  CHECK_THROWS_AS(DensityField(g, {1, 2}), ValidationError);
  CHECK_THROWS_AS(SpatialGrid(Dimension(1), -1.0, 4), ValidationError);

  // midpoint rule converges at second order on a smooth bump
  auto err = [](int m) {
    SpatialGrid gg(Dimension(1), 5.0, m);
    std::vector<double> f(gg.size());
    for (int i = 0; i < m; ++i) f[i] = std::exp(-gg.coordinate(i) * gg.coordinate(i));
    return std::abs(integrate(gg, f) - std::sqrt(pi));
  };
  CHECK(err(64) < 1e-10);
}
