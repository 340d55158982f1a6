#include <doctest.h>

#include <cmath>
#include <random>

#include "fermigas/df_measures.hpp"
#include "fermigas/oracle.hpp"
#include "fermigas/tiling.hpp"

using namespace fermigas;

namespace {

int ipow(int b, int e) {
  int r = 1;
  while (e--) r *= b;
  return r;
}

std::vector<int> digits(int idx, int s, int n) {
  std::vector<int> t(n);
  for (int k = n - 1; k >= 0; --k) {
    t[k] = idx % s;
    idx /= s;
  }
  return t;
}

// Brute force over all S^N tuples: law marginals and the DF mixture marginals.
struct Brute {
  std::vector<Rational> m1, m2, dm1, dm2;
};

Brute brute(int s, int n, const std::function<Rational(const std::vector<int>&)>& p) {
  Brute b{std::vector<Rational>(s), std::vector<Rational>(s * s), std::vector<Rational>(s),
          std::vector<Rational>(s * s)};
  for (int idx = 0; idx < ipow(s, n); ++idx) {
    auto t = digits(idx, s, n);
    Rational w = p(t);
    if (w == 0) continue;
    b.m1[t[0]] += w;
    if (n >= 2) b.m2[t[0] * s + t[1]] += w;
    std::vector<Rational> emp(s);
    for (int x : t) emp[x] += Rational(1, n);
    for (int a = 0; a < s; ++a) {
      b.dm1[a] += w * emp[a];
      for (int c = 0; c < s; ++c) b.dm2[a * s + c] += w * emp[a] * emp[c];
    }
  }
  return b;
}

Rational tv(const std::vector<Rational>& a, const std::vector<Rational>& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += abs(a[i] - b[i]);
  return s;
}

}  // namespace

TEST_CASE("multiset enumeration") {
  CHECK(multiset_count(3, 3) == 10);
  CHECK(multiset_count(6, 5) == 252);
  int seen = 0;
  for_each_multiset(4, 3, [&](const Counts& c) {
    int sum = 0;
    for (int x : c) sum += x;
    CHECK(sum == 3);
    ++seen;
  });
  CHECK(seen == 20);
  CHECK_THROWS_AS(for_each_multiset(30, 30, [](const Counts&) {}, 1e6), CapError);
  CHECK(multinomial({2, 1, 0}) == 3);
}

TEST_CASE("law validation") {
  CHECK_THROWS_AS(FiniteExchangeableLaw(2, 2, {{{1, 1}, Rational(1, 2)}}), ValidationError);
  CHECK_THROWS_AS(FiniteExchangeableLaw(2, 2, {{{2, 0}, Rational(3, 2)}, {{0, 2}, Rational(-1, 2)}}),
                  ValidationError);
  CHECK_THROWS_AS(FiniteExchangeableLaw(2, 2, {{{3, 0}, Rational(1)}}), ValidationError);
  CHECK_THROWS_AS(FiniteExchangeableLaw::product({Rational(1, 2), Rational(1, 3)}, 2), ValidationError);
  // asymmetric tuple table
  std::vector<Rational> p{Rational(1, 2), Rational(1, 2), 0, 0};
  CHECK_THROWS_AS(FiniteExchangeableLaw::from_tuples(2, 2, p), ValidationError);
  auto law = FiniteExchangeableLaw::uniform(3, 4);
  CHECK(law.total() == 1);
  CHECK(law.tuple_probability({0, 1, 2, 2}) == Rational(1, 81));
}

TEST_CASE("N = 1: the DF marginal is the law") {
  auto law = FiniteExchangeableLaw::product({Rational(1, 5), Rational(3, 5), Rational(1, 5)}, 1);
  auto d = df_decomposition(law);
  CHECK(d.marginal1 == d.df_marginal1);
  CHECK(d.marginal2.empty());
  CHECK(d.atoms.size() == 3);
}

TEST_CASE("uniform law S = 3, N = 3 against 27-tuple brute force") {
  const int s = 3, n = 3;
  auto law = FiniteExchangeableLaw::uniform(s, n);
  auto d = df_decomposition(law);
  auto b = brute(s, n, [](const std::vector<int>&) { return Rational(1, 27); });
  CHECK(d.marginal1 == b.m1);
  CHECK(d.marginal2 == b.m2);
  CHECK(d.df_marginal1 == b.dm1);
  CHECK(d.df_marginal2 == b.dm2);
  CHECK(d.df_marginal1 == d.marginal1);
  for (int a = 0; a < s; ++a)
    for (int c = 0; c < s; ++c) {
      Rational want = Rational(n - 1, n) * d.marginal2[a * s + c] + (a == c ? Rational(1, n) * d.marginal1[a] : 0);
      CHECK(d.df_marginal2[a * s + c] == want);
    }
  Rational atoms = 0;
  for (const auto& at : d.atoms) atoms += at.weight;
  CHECK(atoms == 1);
  CHECK(d.atoms.size() == 10);
}

TEST_CASE("TV bound: k = 1 is zero, product law S = 4, N = 4") {
  auto law = FiniteExchangeableLaw::product(
      {Rational(1, 10), Rational(2, 10), Rational(3, 10), Rational(4, 10)}, 4);
  auto c1 = tv_bound_check(law, 1);
  CHECK(c1.tv == 0);
  CHECK(c1.bound == 0);
  CHECK(c1.pass);
  auto c2 = tv_bound_check(law, 2);
  CHECK(c2.bound == 1);
  CHECK(c2.pass);
  std::vector<Rational> sigma{Rational(1, 10), Rational(2, 10), Rational(3, 10), Rational(4, 10)};
  auto b = brute(4, 4, [&](const std::vector<int>& t) {
    Rational w = 1;
    for (int x : t) w *= sigma[x];
    return w;
  });
  CHECK(c2.tv == tv(b.m2, b.dm2));
  CHECK_THROWS_AS(tv_bound_check(law, 5), ValidationError);
}

TEST_CASE("random laws on every small state space are exact") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> u(0, 9);
  for (int s = 1; s <= 6; ++s)
    for (int n = 1; n <= 5; ++n) {
      std::map<Counts, Rational> w;
      Rational total = 0;
      for_each_multiset(s, n, [&](const Counts& c) {
        Rational x = u(rng);
        w[c] = x;
        total += x;
      });
      if (total == 0) continue;
      for (auto& [c, x] : w) x /= total;
      FiniteExchangeableLaw law(s, n, w);
      auto d = df_decomposition(law);
      CHECK(d.marginal1 == d.df_marginal1);
      if (n >= 2) {
        auto c = tv_bound_check(law, 2);
        CHECK(c.pass);
        CHECK(c.tv <= Rational(4, n));
        // dense cross-check against tuple probabilities
        auto b = brute(s, n, [&](const std::vector<int>& t) { return law.tuple_probability(t); });
        CHECK(b.m2 == d.marginal2);
        CHECK(b.dm2 == d.df_marginal2);
      }
    }
}

TEST_CASE("symmetrized Husimi law of the N = 3 oracle ground state") {
  const int n = 3;
  SpatialGrid g(Dimension(1), 3, 60);
  auto w = std::make_shared<InteractionProfile>(InteractionProfile::indicator(Dimension(1), 2, 1, 0.1));
  DiscreteHamiltonian h(g, n, sample(TrapPotential::harmonic(Dimension(1)), g), ScaledInteraction(w, n));
  auto gs = ground_state(h);
  auto fam = CoherentFamily::for_particles(n, 0.1, Envelope(Dimension(1)));
  Tiling t(Dimension(1), 2.0, 3, 2);  // six cells
  std::vector<Eigen::VectorXcd> modes;
  for (std::size_t j = 0; j < t.cell_count(); ++j) {
    auto z = t.cell_center(j);
    modes.push_back(coherent_mode(fam, g, z.x, z.p));
  }
  auto law = FiniteExchangeableLaw::from_symmetric_function(
      static_cast<int>(t.cell_count()), n, [&](const std::vector<int>& tuple) {
        std::vector<Eigen::VectorXcd> m;
        for (int s : tuple) m.push_back(modes[s]);
        return nbody_husimi(gs.state, m);
      });
  // antisymmetry: repeated cells carry no weight
  for (const auto& [c, x] : law.weights())
    if (*std::max_element(c.begin(), c.end()) > 1) CHECK(static_cast<double>(x) < 1e-12);
  auto d = df_decomposition(law);
  CHECK(d.marginal1 == d.df_marginal1);
  auto c = tv_bound_check(law, 2);
  CHECK(c.pass);
}
