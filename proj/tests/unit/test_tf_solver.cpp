#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fermigas/tf_solver.hpp"

using namespace fermigas;
constexpr double pi = std::numbers::pi;

namespace {

const Dimension d1(1), d2(2);

std::vector<double> harmonic_samples(const SpatialGrid& g) {
  return sample(TrapPotential::harmonic(g.dim()), g);
}

// 1D free TF with c = pi^2: rho = sqrt((lambda - x^2)_+ / 3c), lambda = 2 sqrt 3
DensityField free_tf_1d(const SpatialGrid& g) {
  const double lambda = 2 * std::sqrt(3.0);
  std::vector<double> r(g.size());
  for (int i = 0; i < g.points(); ++i) {
    double x = g.coordinate(i);
    r[i] = std::sqrt(std::max(lambda - x * x, 0.0)) / (std::sqrt(3.0) * pi);
  }
  return DensityField(g, r);
}

}  // namespace

TEST_CASE("tf_energy of zero density is zero") {
  SpatialGrid g(d1, 3, 64);
  auto e = tf_energy(DensityField::zeros(g), harmonic_samples(g), pi * pi, 1.0);
  CHECK(e.kinetic == 0);
  CHECK(e.potential == 0);
  CHECK(e.interaction == 0);
  CHECK(e.total == 0);
}

TEST_CASE("tf_energy of the analytic 1D free minimizer") {
  SpatialGrid g(d1, 3, 20000);
  auto rho = free_tf_1d(g);
  CHECK(rho.mass() == doctest::Approx(1).epsilon(1e-4));
  auto e = tf_energy(rho, harmonic_samples(g), pi * pi, 0.0);
  CHECK(std::abs(e.total - std::sqrt(3.0)) < 1e-4);
}

TEST_CASE("tf_energy of the analytic 2D paraboloid") {
  const double kappa = 4 * pi, lambda = 4;
  SpatialGrid g(d2, 2.5, 512);
  std::vector<double> r(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    Point x = g.point(k);
    r[k] = std::max(lambda - x[0] * x[0] - x[1] * x[1], 0.0) / (2 * kappa);
  }
  DensityField rho(g, r);
  CHECK(rho.mass() == doctest::Approx(pi * lambda * lambda / (4 * kappa)).epsilon(1e-4));
  auto e = tf_energy(rho, harmonic_samples(g), 8 * pi, 4 * pi);
  CHECK(std::abs(e.total - 8.0 / 3.0) < 1e-4);
}

TEST_CASE("minimize_2d closed form") {
  auto c = TFConstants::make(d2, ConstantsConvention::PaperLiteral);
  SpatialGrid g(d2, 2.5, 128);
  auto s = minimize_2d(TrapPotential::harmonic(d2), c, 4 * pi, g);
  CHECK(std::abs(s.lambda - 4) < 1e-4);
  CHECK(std::abs(s.energy.total - 8.0 / 3.0) < 1e-3);
  CHECK(s.mass_gap < 1e-8);
  CHECK(s.el_residual < 1e-8);
  CHECK(s.complement_min >= -1e-9);
  CHECK_FALSE(s.touches_boundary);

  // I_w = 0: lambda = sqrt(4 c / pi)
  auto b = TFConstants::make(d2, ConstantsConvention::BathTubConsistent);
  SpatialGrid g2(d2, 2.0, 128);
  auto f = minimize_2d(TrapPotential::harmonic(d2), b, 0.0, g2);
  CHECK(std::abs(f.lambda - std::sqrt(4 * b.c_tf / pi)) < 1e-3);
  CHECK_THROWS_AS(minimize_2d(TrapPotential::harmonic(d2), b, b.c_tf, g2), ValidationError);
}

TEST_CASE("minimize_2d converges under refinement") {
  auto c = TFConstants::make(d2, ConstantsConvention::PaperLiteral);
  double prev = 1;
  for (int m : {32, 64, 128}) {
    auto s = minimize_2d(TrapPotential::harmonic(d2), c, 4 * pi, SpatialGrid(d2, 2.5, m));
    double err = std::abs(s.energy.total - 8.0 / 3.0);
    // below ~1e-6 the error is set by the mass tolerance, not the grid
    CHECK(err < std::max(prev, 1e-6));
    prev = err;
  }
}

TEST_CASE("annulus of huge potential stays empty") {
  SpatialGrid g(d2, 2.5, 96);
  auto v = harmonic_samples(g);
  for (std::size_t k = 0; k < g.size(); ++k) {
    double r = norm(g.point(k));
    if (r > 0.8 && r < 1.2) v[k] = 1e6;
  }
  auto s = minimize_2d(v, g, 8 * pi, 4 * pi);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (v[k] > s.lambda) CHECK(s.rho[k] == 0);
  CHECK(s.rho.mass() == doctest::Approx(1).epsilon(1e-8));
}

TEST_CASE("minimize_1d_relaxed free closed form and refinement") {
  RelaxedLocalEnergy rel(pi * pi, 0.0);
  CHECK(rel.rho_alpha() == 0);
  CHECK(rel.alpha() == 0);
  auto s = minimize_1d_relaxed(TrapPotential::harmonic(d1), rel, SpatialGrid(d1, 3, 4096));
  CHECK(std::abs(s.lambda - 2 * std::sqrt(3.0)) < 1e-3);
  CHECK(std::abs(s.energy.total - std::sqrt(3.0)) < 1e-3);
  CHECK(s.el_residual < 1e-6);

  double prev = 1;
  for (int m : {256, 1024, 4096}) {
    auto t = minimize_1d_relaxed(TrapPotential::harmonic(d1), rel, SpatialGrid(d1, 3, m));
    double err = std::abs(t.energy.total - std::sqrt(3.0));
    // below ~1e-6 the error is set by the mass tolerance, not the grid
    CHECK(err < std::max(prev, 1e-6));
    prev = err;
  }
}

TEST_CASE("jump condition for attractive 1D") {
  const double c = pi * pi / 3, i = 2.0;
  RelaxedLocalEnergy rel(c, i);
  SolverOptions o;
  o.mass_tol = 1e-3;
  auto s = minimize_1d_relaxed(TrapPotential::harmonic(d1), rel, SpatialGrid(d1, 3, 4096), o);
  CHECK(s.jump_min >= i / (2 * c) - 1e-6);
  auto r = relaxation_equivalence_check(TrapPotential::harmonic(d1), rel, SpatialGrid(d1, 3, 4096),
                                        1e-6, o);
  CHECK(r.pass);
  CHECK(r.difference <= 1e-6);
}

TEST_CASE("relaxation with I_w = 0 passes trivially") {
  RelaxedLocalEnergy rel(pi * pi, 0.0);
  auto r = relaxation_equivalence_check(TrapPotential::harmonic(d1), rel, SpatialGrid(d1, 3, 1024), 1e-6);
  CHECK(r.pass);
}

TEST_CASE("perturbing the minimizer below rho_alpha raises the energy") {
  const double c = pi * pi / 3, i = 2.0;
  RelaxedLocalEnergy rel(c, i);
  SolverOptions o;
  o.mass_tol = 1e-3;
  SpatialGrid g(d1, 3, 2048);
  auto v = harmonic_samples(g);
  auto s = minimize_1d_relaxed(v, g, rel, o);
  double ej = relaxed_energy(s.rho, v, rel);
  // move 5% of the mass into a thin layer of height rho_alpha / 2 beside the support
  std::vector<double> r = s.rho.values();
  for (double& x : r) x *= 0.95;
  double h = rel.rho_alpha() / 2, want = 0.05 * s.rho.mass();
  for (int k = g.points() - 1; k >= 0 && want > 0; --k) {
    if (r[k] > 0) continue;
    double add = std::min(h, want / g.spacing());
    r[k] = add;
    want -= add * g.spacing();
  }
  DensityField pert(g, r);
  CHECK(pert.mass() == doctest::Approx(s.rho.mass()).epsilon(1e-9));
  CHECK(tf_energy(pert, v, c, i).total > ej);
}

TEST_CASE("mass map is nondecreasing in lambda") {
  SpatialGrid g1(d1, 3, 512);
  RelaxedLocalEnergy rel(pi * pi / 3, 2.0);
  auto v1 = harmonic_samples(g1);
  SpatialGrid g2(d2, 2.5, 64);
  auto v2 = harmonic_samples(g2);
  double m1 = -1, m2 = -1;
  for (double lam = -2; lam <= 8; lam += 0.05) {
    double a = density_at_lambda_1d(v1, g1, rel, lam).mass();
    double b = density_at_lambda_2d(v2, g2, 4 * pi, lam).mass();
    CHECK(a >= m1);
    CHECK(b >= m2);
    m1 = a;
    m2 = b;
  }
}

TEST_CASE("solver output dominates 50 random densities") {
  const double c = pi * pi / 3, i = 1.0;
  RelaxedLocalEnergy rel(c, i);
  SpatialGrid g(d1, 3, 512);
  auto v = harmonic_samples(g);
  SolverOptions o;
  o.mass_tol = 1e-3;
  auto s = minimize_1d_relaxed(v, g, rel, o);
  double best = tf_energy(s.rho, v, c, i).total;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> noise(g.size()), r(g.size());
    for (double& x : noise) x = nd(rng);
    // moving average of width 15, squared, under a random Gaussian envelope
    double centre = nd(rng) * 0.5, width = 0.4 + 0.8 * std::abs(nd(rng));
    for (int k = 0; k < g.points(); ++k) {
      double acc = 0;
      for (int j = std::max(0, k - 7); j <= std::min(g.points() - 1, k + 7); ++j) acc += noise[j];
      double x = g.coordinate(k);
      r[k] = acc * acc * std::exp(-(x - centre) * (x - centre) / (width * width)) + 1e-3;
    }
    DensityField raw(g, r);
    for (double& x : r) x /= raw.mass();
    CHECK(tf_energy(DensityField(g, r), v, c, i).total >= best - 1e-3);
  }
}

TEST_CASE("el_residual flags a non-minimizer and handles empty support") {
  SpatialGrid g(d1, 3, 256);
  auto v = harmonic_samples(g);
  std::vector<double> box(g.size(), 0.0);
  for (int k = 0; k < g.points(); ++k)
    if (std::abs(g.coordinate(k)) < 1) box[k] = 0.5;
  auto r = el_residual_best_lambda(DensityField(g, box), v, pi * pi, 0.0);
  CHECK(r.support_defect > 0.1);

  auto e = el_residual(DensityField::zeros(g), 1.0, v, pi * pi, 0.0);
  CHECK(e.support_empty());
  CHECK(e.support_defect == 0);
  CHECK(std::isfinite(e.complement_min));
}

TEST_CASE("e_alpha zeros and J convexity") {
  for (auto [c, i] : {std::pair{pi * pi / 3, 2.0}, std::pair{1.0, 0.3}, std::pair{5.0, 7.0}}) {
    RelaxedLocalEnergy rel(c, i);
    double ra = rel.rho_alpha();
    CHECK(rel.e(0) == 0);
    CHECK(std::abs(rel.e(ra)) <= 1e-14 * std::max(1.0, rel.alpha() * ra));
    CHECK(std::abs(rel.de(ra)) <= 1e-14 * std::max(1.0, rel.alpha()));
    CHECK(rel.j(0.5 * ra) == 0);
    // J is convex: midpoint test on a grid of pairs
    for (double a = 0; a < 3 * ra; a += 0.1 * ra)
      for (double b = a; b < 3 * ra; b += 0.13 * ra)
        CHECK(rel.j(0.5 * (a + b)) <= 0.5 * (rel.j(a) + rel.j(b)) + 1e-12);
    auto eta = rel.eta_variant();
    CHECK(eta.c_tf() == doctest::Approx(0.5 * c));
    CHECK(std::abs(eta.e(eta.rho_alpha())) <= 1e-12 * std::max(1.0, eta.alpha()));
  }
  CHECK_THROWS_AS(RelaxedLocalEnergy(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(RelaxedLocalEnergy(1.0, 1.0, 1.0), ValidationError);
}

TEST_CASE("double well: restricted single-well solve is never better") {
  const double c = pi * pi / 3, i = 2.0;
  RelaxedLocalEnergy rel(c, i);
  SpatialGrid g(d1, 3.5, 4096);
  auto v = sample(TrapPotential::double_well(d1, 1.5, 4.0), g);
  SolverOptions o;
  o.mass_tol = 1e-3;
  auto full = minimize_1d_relaxed(v, g, rel, o);
  auto right = v;
  for (int k = 0; k < g.points(); ++k)
    if (g.coordinate(k) < 0) right[k] = 1e6;
  auto one = minimize_1d_relaxed(right, g, rel, o);
  double ef = relaxed_energy(full.rho, v, rel), eo = relaxed_energy(one.rho, v, rel);
  CHECK(ef <= eo + 1e-6);
  // the solver's minimizer is mirror symmetric
  for (int k = 0; k < g.points(); ++k)
    CHECK(full.rho[k] == doctest::Approx(full.rho[g.points() - 1 - k]).epsilon(1e-9));
  MESSAGE("double well: full " << ef << ", single well " << eo);
}

TEST_CASE("forced 2D evaluation blows down when I_w > c_TF") {
  SpatialGrid g(d2, 4.0, 256);
  auto v = harmonic_samples(g);
  const double c = 2 * pi, i = 3 * pi;
  double prev = INFINITY;
  for (double n : {1.0, 2.0, 4.0}) {
    std::vector<double> r(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) {
      Point x = g.point(k);
      r[k] = n * n * std::exp(-n * n * (x[0] * x[0] + x[1] * x[1])) / pi;
    }
    double e = tf_energy(DensityField(g, r), v, c, i).total;
    CHECK(e < prev);
    prev = e;
  }
}
