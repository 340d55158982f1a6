#include <doctest.h>

#include <cmath>
#include <random>

#include "fermigas/wasserstein.hpp"

using namespace fermigas;

namespace {
const Dimension d1(1), d2(2);
}

TEST_CASE("W1 of a measure with itself is zero") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  DiscreteMeasure mu{d1, {}, {}};
  for (int i = 0; i < 30; ++i) {
    mu.points.push_back({{u(rng), 0}, {u(rng), 0}});
    mu.weights.push_back(1.0 / 30);
  }
  auto r = wasserstein1(mu, mu);
  CHECK(r.distance == doctest::Approx(0).scale(1));
  CHECK(r.distance < 1e-14);
  CHECK(r.certified);
  CHECK(r.ground_metric == "euclidean");
}

TEST_CASE("single pair transport is the Euclidean distance") {
  PhasePoint a{{0.5, -1}, {2, 0}}, b{{1.5, 1}, {0, 0.5}};
  auto r = wasserstein1(DiscreteMeasure{d2, {a}, {1}}, DiscreteMeasure{d2, {b}, {1}});
  CHECK(r.distance == doctest::Approx(std::sqrt(1 + 4 + 4 + 0.25)));
  CHECK(r.certified);
  CHECK(std::abs(r.gap) < 1e-12);
}

TEST_CASE("flow solver agrees with the CDF formula on a line") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-3, 3), w(0.1, 1);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> xa, wa, xb, wb;
    DiscreteMeasure mu{d1, {}, {}}, nu{d1, {}, {}};
    double sa = 0, sb = 0;
    for (int i = 0; i < 25; ++i) {
      xa.push_back(u(rng));
      wa.push_back(w(rng));
      sa += wa.back();
    }
    for (int i = 0; i < 17; ++i) {
      xb.push_back(u(rng));
      wb.push_back(w(rng));
      sb += wb.back();
    }
    for (double& x : wa) x /= sa;
    for (double& x : wb) x /= sb;
    for (std::size_t i = 0; i < xa.size(); ++i) {
      mu.points.push_back({{xa[i], 0}, {0, 0}});
      mu.weights.push_back(wa[i]);
    }
    for (std::size_t i = 0; i < xb.size(); ++i) {
      nu.points.push_back({{xb[i], 0}, {0, 0}});
      nu.weights.push_back(wb[i]);
    }
    auto r = wasserstein1(mu, nu);
    CHECK(r.certified);
    CHECK(r.distance == doctest::Approx(wasserstein1_line(xa, wa, xb, wb)).epsilon(1e-9));
  }
}

TEST_CASE("averaging moves mass at most one cell diameter") {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 20; ++t) {
    Dimension d = t % 2 ? d2 : d1;
    Tiling tiling(d, 1.0, 3, 2);
    std::uniform_real_distribution<double> u(-1.3, 1.3);
    std::vector<PhasePoint> z(40);
    for (auto& p : z) {
      p.x = {u(rng), d.value() == 2 ? u(rng) : 0.0};
      p.p = {u(rng), d.value() == 2 ? u(rng) : 0.0};
    }
    EmpiricalMeasure emp(d, z);
    auto inside = emp.as_discrete().restricted(tiling);
    if (inside.mass() == 0) continue;
    auto bar = average_measure(inside, tiling).discretize(d.value() == 1 ? 4 : 2);
    auto r = wasserstein1(bar, inside);
    CHECK(r.certified);
    CHECK(r.distance <= tiling.cell_diameter() * inside.mass() + 1e-12);
  }
}

TEST_CASE("W1 input validation") {
  DiscreteMeasure a{d1, {{{0, 0}, {0, 0}}}, {1.0}};
  DiscreteMeasure b{d1, {{{1, 0}, {0, 0}}}, {0.5}};
  CHECK_THROWS_AS(wasserstein1(a, b), ValidationError);
  DiscreteMeasure c{d2, {{{1, 0}, {0, 0}}}, {1.0}};
  CHECK_THROWS_AS(wasserstein1(a, c), ValidationError);
  DiscreteMeasure big{d1, std::vector<PhasePoint>(5001), std::vector<double>(5001, 1.0 / 5001)};
  CHECK_THROWS_AS(wasserstein1(big, a), CapError);
  CHECK_THROWS_AS(wasserstein1_line({0}, {1}, {1}, {2}), ValidationError);
}
