#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fermigas/quadrature.hpp"
#include "fermigas/tiling.hpp"

#ifdef FERMIGAS_HAVE_OPENMP
#include <omp.h>
#endif

using namespace fermigas;
constexpr double two_pi = 2 * std::numbers::pi;

namespace {
const Dimension d1(1), d2(2);

std::vector<PhasePoint> random_points(const Tiling& t, int n, unsigned seed, double spread = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-spread * t.half_width(), spread * t.half_width());
  std::vector<PhasePoint> z(n);
  for (auto& p : z) {
    p.x[0] = u(rng);
    p.p[0] = u(rng);
    if (t.dim().value() == 2) {
      p.x[1] = u(rng);
      p.p[1] = u(rng);
    }
  }
  return z;
}

// P(Bin(n, q) >= k) by direct summation in log space
double tail(int n, double q, int k) {
  double s = 0;
  for (int j = k; j <= n; ++j)
    s += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) +
                  j * std::log(q) + (n - j) * std::log1p(-q));
  return s;
}
}  // namespace

TEST_CASE("tiling geometry") {
  Tiling t(d1, 2.0, 4, 2);
  CHECK(t.cell_count() == 8);
  CHECK(t.l_x() == doctest::Approx(1));
  CHECK(t.l_p() == doctest::Approx(2));
  CHECK(t.cell_volume() == doctest::Approx(2));
  CHECK(t.cell_diameter() == doctest::Approx(std::sqrt(5.0)));
  CHECK(t.volume() == doctest::Approx(16));
  for (std::size_t j = 0; j < t.cell_count(); ++j) CHECK(t.cell_of(t.cell_center(j)) == static_cast<long>(j));
  CHECK(t.cell_of({{2.0, 0}, {2.0, 0}}) == static_cast<long>(t.cell_count() - 1));
  CHECK(t.cell_of({{2.01, 0}, {0, 0}}) == -1);
  CHECK_FALSE(t.contains({{0, 0}, {-2.5, 0}}));

  Tiling t2(d2, 1.0, 2, 3);
  CHECK(t2.cell_count() == 36);
  for (std::size_t j = 0; j < t2.cell_count(); ++j) CHECK(t2.cell_of(t2.cell_center(j)) == static_cast<long>(j));
  CHECK_THROWS_AS(Tiling(d1, 1.0, 0, 2), ValidationError);
  CHECK_THROWS_AS(Tiling(d1, 0.0, 2, 2), ValidationError);
}

TEST_CASE("paper-scaling schedule") {
  for (int d : {1, 2})
    for (double n : {64.0, 1e4}) {
      double dd = d;
      double gamma = 4 / (4 * dd + 1);
      double lx = std::pow(n, -2 / (dd * (2 * dd + 1)));
      double lp = std::pow(n, -2 / (dd * (2 * dd + 1) * (4 * dd + 1)));
      double half = std::pow(n, -gamma / (2 * dd));
      // |Omega| = N^{-gamma} and |S_L| / |Omega| = 4^d n^{2d}
      CHECK(std::pow(lx * lp, dd) == doctest::Approx(std::pow(n, -gamma)).epsilon(1e-12));
      CHECK(std::pow(2 * half, 2 * dd) / std::pow(lx * lp, dd) == doctest::Approx(std::pow(4, dd)).epsilon(1e-12));
      auto t = Tiling::paper_scaling(Dimension(d), n, 1);
      CHECK(t.half_width() == doctest::Approx(half));
      CHECK(t.cells_x() == std::max(1L, std::lround(2 * half / lx)));
      CHECK(t.cells_p() == std::max(1L, std::lround(2 * half / lp)));
    }
}

TEST_CASE("averaging a point at a cell centre spreads it over that cell") {
  Tiling t(d1, 2.0, 4, 4);
  auto z = t.cell_center(5);
  auto avg = average_measure(DiscreteMeasure{d1, {z}, {0.25}}, t);
  for (std::size_t j = 0; j < t.cell_count(); ++j)
    CHECK(avg.cell_mass[j] == (j == 5 ? 0.25 : 0.0));
  CHECK(avg.density(5) == doctest::Approx(0.25 / t.cell_volume()));
  auto disc = avg.discretize(3);
  CHECK(disc.points.size() == 9);
  for (const auto& p : disc.points) CHECK(t.cell_of(p) == 5);
}

TEST_CASE("uniform measure is a fixed point of averaging") {
  Tiling t(d1, 1.5, 3, 3);
  DiscreteMeasure fine{d1, {}, {}};
  // uniform grid of 12 x 12 points: four per cell per axis
  for (int i = 0; i < 12; ++i)
    for (int k = 0; k < 12; ++k) {
      fine.points.push_back({{-1.5 + (i + 0.5) * 0.25, 0}, {-1.5 + (k + 0.5) * 0.25, 0}});
      fine.weights.push_back(1.0 / 144);
    }
  auto avg = average_measure(fine, t);
  for (double m : avg.cell_mass) CHECK(m == doctest::Approx(1.0 / 9));
  auto back = avg.discretize(4);
  REQUIRE(back.points.size() == fine.points.size());
  auto again = average_measure(back, t);
  for (std::size_t j = 0; j < t.cell_count(); ++j) CHECK(again.cell_mass[j] == doctest::Approx(avg.cell_mass[j]).epsilon(1e-14));
}

TEST_CASE("empirical cell masses are exact counts over N") {
  Tiling t(d2, 1.0, 2, 2);
  auto z = random_points(t, 100, 4, 1.2);
  EmpiricalMeasure emp(d2, z);
  CHECK(emp.total_mass() == 1);
  auto avg = average_measure(emp, t);
  std::vector<long> count(t.cell_count(), 0);
  long out = 0;
  for (const auto& p : z) {
    long j = t.cell_of(p);
    j < 0 ? ++out : ++count[j];
  }
  Rational inside = 0;
  for (std::size_t j = 0; j < t.cell_count(); ++j) {
    CHECK(avg.exact_cell_mass[j] == Rational(count[j], 100));
    inside += avg.exact_cell_mass[j];
  }
  CHECK(inside == Rational(100 - out, 100));
  // mass of mu-bar equals mass of mu restricted to S_L
  CHECK(std::abs(avg.mass() - emp.as_discrete().restricted(t).mass()) < 1e-12);
}

TEST_CASE("single atoms break the pointwise Pauli bound") {
  for (int n : {4, 64, 1000})
    for (int d : {1, 2}) {
      double vol = 0.5 * std::pow(two_pi, d) / n;  // < (2 pi)^d / N
      CHECK(violates_pauli(1.0 / n, vol, Dimension(d), 0.0));
    }
  CHECK_FALSE(violates_pauli(0.0, 1.0, d1, 0.0));
}

TEST_CASE("Pauli statistics") {
  const double half = 0.5 * std::sqrt(two_pi);
  Tiling t(d1, half, 4, 4);
  const int n = 64;
  auto sampler = iid_configurations(uniform_sampler(t), n);

  SUBCASE("huge epsilon never violates") {
    auto s = pauli_violation_stats(sampler, n, t, 0, 1e9, 500, 1);
    CHECK(s.hits_cell == 0);
    CHECK(s.hits_any == 0);
    CHECK(s.frequency_cell == 0);
  }
  SUBCASE("frequency sits in the CI of the exact binomial tail") {
    auto s = pauli_violation_stats(sampler, n, t, 0, 0.5, 10000, 2024, 1.0 / 16);
    CHECK(s.threshold_count == doctest::Approx(6));
    REQUIRE(s.exact_tail.has_value());
    CHECK(*s.exact_tail == doctest::Approx(tail(n, 1.0 / 16, 6)).epsilon(1e-10));
    CHECK(s.ci_low <= s.frequency_cell);
    CHECK(s.frequency_cell <= s.ci_high);
    CHECK(s.within_ci());
    CHECK(s.frequency_any >= s.frequency_cell);
  }
  SUBCASE("same seed, same result, any thread count") {
    auto a = pauli_violation_stats(sampler, n, t, 3, 0.5, 2000, 99);
#ifdef FERMIGAS_HAVE_OPENMP
    int before = omp_get_max_threads();
    omp_set_num_threads(3);
#endif
    auto b = pauli_violation_stats(sampler, n, t, 3, 0.5, 2000, 99);
#ifdef FERMIGAS_HAVE_OPENMP
    omp_set_num_threads(before);
#endif
    CHECK(a.hits_cell == b.hits_cell);
    CHECK(a.hits_any == b.hits_any);
    auto c = pauli_violation_stats(sampler, n, t, 3, 0.5, 2000, 100);
    CHECK((c.hits_cell != a.hits_cell || c.hits_any != a.hits_any));
  }
  CHECK_THROWS_AS(pauli_violation_stats(sampler, n, t, 99, 0.5, 10, 1), ValidationError);
}

TEST_CASE("binomial tail helper") {
  CHECK(binomial_upper_tail(10, 0.3, 0) == doctest::Approx(1));
  CHECK(binomial_upper_tail(10, 0.3, 11) == 0);
  CHECK(binomial_upper_tail(20, 0.1, 3.5) == doctest::Approx(tail(20, 0.1, 4)).epsilon(1e-12));
}

TEST_CASE("violation frequency decays over an N sweep") {
  const double half = 0.5 * std::sqrt(two_pi);
  Tiling t(d1, half, 4, 4);
  std::vector<double> ns{16, 64, 256}, freq;
  for (double n : ns) {
    auto s = pauli_violation_stats(iid_configurations(uniform_sampler(t), static_cast<int>(n)),
                                   static_cast<int>(n), t, 0, 0.5, 10000, 7);
    freq.push_back(s.frequency_cell);
  }
  auto fit = fit_pauli_decay(ns, freq, 1.0, 0.5);
  CHECK(fit.slope < 0);
  CHECK(fit.rate > 0);
  auto ll = loglog_fit(ns, freq);
  CHECK(ll.slope < 0);
}

TEST_CASE("law-driven configurations respect the law") {
  auto law = FiniteExchangeableLaw::product({Rational(1, 2), Rational(1, 2)}, 4);
  Tiling t(d1, 1.0, 2, 1);
  auto sampler = law_configurations(law, {t.cell_center(0), t.cell_center(1)});
  std::mt19937_64 rng(1);
  std::vector<PhasePoint> z;
  int first = 0, total = 0;
  for (int k = 0; k < 4000; ++k) {
    sampler(rng, z);
    REQUIRE(z.size() == 4);
    for (const auto& p : z) {
      first += t.cell_of(p) == 0;
      ++total;
    }
  }
  CHECK(static_cast<double>(first) / total == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("restriction and averaging defects") {
  auto v = TrapPotential::harmonic(d1);
  Tiling t(d1, 3.0, 12, 12);

  SUBCASE("measure inside S_L, no interaction") {
    auto z = random_points(t, 200, 8, 0.6);
    auto mu = EmpiricalMeasure(d1, z).as_discrete();
    auto r = restriction_energy_defect(mu, t, v, nullptr, 100.0);
    CHECK(r.restriction_defect == 0);
    CHECK(r.lost_mass == 0);
    CHECK(std::isfinite(r.averaging_fitted_c));
    CHECK(std::abs(r.averaging_defect) <= r.averaging_shape);
    MESSAGE("averaging constant " << r.averaging_fitted_c);
  }
  SUBCASE("point mass far outside") {
    DiscreteMeasure mu{d1, {{{10, 0}, {0, 0}}}, {1.0}};
    auto r = restriction_energy_defect(mu, t, v, nullptr, 1e3);
    CHECK(r.energy_restricted == 0);
    CHECK(r.restriction_defect == doctest::Approx(r.energy));
    CHECK(r.energy == doctest::Approx(100));
    CHECK(r.lost_mass == 1);
  }
  SUBCASE("tau violation is reported, not thrown") {
    DiscreteMeasure mu{d1, {{{10, 0}, {0, 0}}}, {1.0}};
    auto r = restriction_energy_defect(mu, t, v, nullptr, 1.0);
    CHECK_FALSE(r.tau_ok);
  }
  SUBCASE("averaging defect shrinks under refinement") {
    auto w = std::make_shared<InteractionProfile>(InteractionProfile::bump(d1, 1, 1, 0.1));
    ScaledInteraction wn(w, 8);
    auto z = random_points(Tiling(d1, 2.0, 1, 1), 300, 12);
    auto mu = EmpiricalMeasure(d1, z).as_discrete();
    double prev = INFINITY;
    for (int cells : {4, 8, 16}) {
      auto r = restriction_energy_defect(mu, Tiling(d1, 2.0, cells, cells), v, &wn, 100.0);
      CHECK(std::isfinite(r.averaging_defect));
      CHECK(std::abs(r.averaging_defect) < prev);
      prev = std::abs(r.averaging_defect);
    }
  }
}
