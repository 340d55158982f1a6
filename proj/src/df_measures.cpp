#include "fermigas/df_measures.hpp"

#include <cmath>
#include <string>

namespace fermigas {

namespace {

Rational falling(int n, int r) {
  Rational out = 1;
  for (int i = 0; i < r; ++i) out *= (n - i);
  return out;
}

std::size_t ipow(int b, int e) {
  std::size_t out = 1;
  for (int i = 0; i < e; ++i) out *= static_cast<std::size_t>(b);
  return out;
}

std::vector<int> decode(std::size_t index, int states, int length) {
  std::vector<int> t(length);
  for (int i = length - 1; i >= 0; --i) {
    t[i] = static_cast<int>(index % states);
    index /= states;
  }
  return t;
}

Counts counts_of(const std::vector<int>& tuple, int states) {
  Counts c(states, 0);
  for (int s : tuple) ++c[s];
  return c;
}

void check_sizes(int states, int particles) {
  if (states < 1) throw ValidationError("state space must be nonempty");
  if (particles < 1) throw ValidationError("need at least one particle");
}

}  // namespace

double multiset_count(int states, int particles) {
  // C(S + N - 1, N) in floating point, only used against caps
  double out = 1;
  for (int i = 1; i <= particles; ++i) out = out * (states - 1 + i) / i;
  return out;
}

void for_each_multiset(int states, int particles, const std::function<void(const Counts&)>& visit,
                       double cap) {
  check_sizes(states, particles);
  if (multiset_count(states, particles) > cap)
    throw CapError("multiset enumeration of " + std::to_string(particles) + " particles on " +
                   std::to_string(states) + " states exceeds cap");
  Counts c(states, 0);
  // recursive fill, last state takes the remainder
  std::function<void(int, int)> rec = [&](int s, int left) {
    if (s == states - 1) {
      c[s] = left;
      visit(c);
      return;
    }
    for (int k = left; k >= 0; --k) {
      c[s] = k;
      rec(s + 1, left - k);
    }
    c[s] = 0;
  };
  rec(0, particles);
}

Rational multinomial(const Counts& c) {
  Rational out = 1;
  int placed = 0;
  for (int k : c) {
    for (int i = 1; i <= k; ++i) {
      ++placed;
      out *= placed;
      out /= i;
    }
  }
  return out;
}

FiniteExchangeableLaw::FiniteExchangeableLaw(int states, int particles,
                                             std::map<Counts, Rational> weights)
    : s_(states), n_(particles) {
  check_sizes(states, particles);
  Rational total = 0;
  for (auto& [c, w] : weights) {
    if (static_cast<int>(c.size()) != states)
      throw ValidationError("multiset has the wrong number of states");
    int sum = 0;
    for (int k : c) {
      if (k < 0) throw ValidationError("negative occupation count");
      sum += k;
    }
    if (sum != particles) throw ValidationError("multiset size differs from N");
    if (w < 0) throw ValidationError("law weights must be nonnegative");
    if (w != 0) w_.emplace(c, w);
    total += w;
  }
  if (std::abs(static_cast<double>(total - 1)) > 1e-12)
    throw ValidationError("law must have total mass 1, got " +
                          std::to_string(static_cast<double>(total)));
}

FiniteExchangeableLaw FiniteExchangeableLaw::uniform(int states, int particles) {
  check_sizes(states, particles);
  Rational norm = Rational(1) / Rational(boost::multiprecision::cpp_int(ipow(states, particles)));
  std::map<Counts, Rational> w;
  for_each_multiset(states, particles, [&](const Counts& c) { w[c] = multinomial(c) * norm; });
  return FiniteExchangeableLaw(states, particles, std::move(w));
}

FiniteExchangeableLaw FiniteExchangeableLaw::product(const std::vector<Rational>& sigma,
                                                     int particles) {
  int states = static_cast<int>(sigma.size());
  check_sizes(states, particles);
  Rational sum = 0;
  for (const auto& x : sigma) {
    if (x < 0) throw ValidationError("sigma must be nonnegative");
    sum += x;
  }
  if (sum != 1) throw ValidationError("sigma must sum to 1");
  std::map<Counts, Rational> w;
  for_each_multiset(states, particles, [&](const Counts& c) {
    Rational p = multinomial(c);
    for (int s = 0; s < states; ++s)
      for (int i = 0; i < c[s]; ++i) p *= sigma[s];
    w[c] = p;
  });
  return FiniteExchangeableLaw(states, particles, std::move(w));
}

FiniteExchangeableLaw FiniteExchangeableLaw::from_symmetric_function(
    int states, int particles, const std::function<double(const std::vector<int>&)>& p,
    double cap) {
  std::map<Counts, Rational> w;
  Rational total = 0;
  for_each_multiset(
      states, particles,
      [&](const Counts& c) {
        std::vector<int> tuple;
        for (int s = 0; s < states; ++s)
          for (int i = 0; i < c[s]; ++i) tuple.push_back(s);
        double v = p(tuple);
        if (!std::isfinite(v) || v < 0)
          throw ValidationError("tuple weights must be finite and nonnegative");
        Rational r = Rational(v) * multinomial(c);
        w[c] = r;
        total += r;
      },
      cap);
  if (total == 0) throw ValidationError("tuple weights vanish identically");
  for (auto& [c, r] : w) r /= total;
  return FiniteExchangeableLaw(states, particles, std::move(w));
}

FiniteExchangeableLaw FiniteExchangeableLaw::from_tuples(int states, int particles,
                                                         const std::vector<Rational>& p) {
  check_sizes(states, particles);
  if (std::pow(double(states), particles) > kDefaultEnumerationCap)
    throw CapError("tuple table exceeds the enumeration cap");
  std::size_t total = ipow(states, particles);
  if (p.size() != total) throw ValidationError("tuple table has the wrong size");
  std::map<Counts, Rational> w, first;
  for (std::size_t i = 0; i < total; ++i) {
    Counts c = counts_of(decode(i, states, particles), states);
    auto it = first.find(c);
    if (it == first.end())
      first.emplace(c, p[i]);
    else if (it->second != p[i])
      throw ValidationError("tuple table is not symmetric under permutations");
    w[c] += p[i];
  }
  return FiniteExchangeableLaw(states, particles, std::move(w));
}

Rational FiniteExchangeableLaw::total() const {
  Rational t = 0;
  for (const auto& [c, w] : w_) t += w;
  return t;
}

Rational FiniteExchangeableLaw::tuple_probability(const std::vector<int>& tuple) const {
  if (static_cast<int>(tuple.size()) != n_) throw ValidationError("tuple length differs from N");
  for (int s : tuple)
    if (s < 0 || s >= s_) throw ValidationError("state index out of range");
  Counts c = counts_of(tuple, s_);
  auto it = w_.find(c);
  if (it == w_.end()) return 0;
  return it->second / multinomial(c);
}

std::vector<Rational> FiniteExchangeableLaw::marginal(int k) const {
  if (k < 1 || k > n_) throw ValidationError("marginal order must lie in [1, N]");
  std::size_t size = ipow(s_, k);
  std::vector<Rational> out(size, 0);
  Rational denom = falling(n_, k);
  for (std::size_t i = 0; i < size; ++i) {
    Counts r = counts_of(decode(i, s_, k), s_);
    Rational acc = 0;
    for (const auto& [c, w] : w_) {
      Rational ways = 1;
      for (int s = 0; s < s_ && ways != 0; ++s) ways *= falling(c[s], r[s]);
      if (ways != 0) acc += w * ways;
    }
    out[i] = acc / denom;
  }
  return out;
}

std::vector<Rational> df_marginal(const FiniteExchangeableLaw& law, int k) {
  int s = law.states(), n = law.particles();
  if (k < 1) throw ValidationError("marginal order must be positive");
  std::size_t size = ipow(s, k);
  std::vector<Rational> out(size, 0);
  Rational denom = 1;
  for (int i = 0; i < k; ++i) denom *= n;
  for (std::size_t i = 0; i < size; ++i) {
    Counts r = counts_of(decode(i, s, k), s);
    Rational acc = 0;
    for (const auto& [c, w] : law.weights()) {
      Rational prod = 1;
      for (int t = 0; t < s && prod != 0; ++t)
        for (int j = 0; j < r[t]; ++j) prod *= c[t];
      acc += w * prod;
    }
    out[i] = acc / denom;
  }
  return out;
}

DFDecomposition df_decomposition(const FiniteExchangeableLaw& law) {
  DFDecomposition d;
  d.states = law.states();
  d.particles = law.particles();
  for (const auto& [c, w] : law.weights()) d.atoms.push_back({c, w});
  d.marginal1 = law.marginal(1);
  d.df_marginal1 = df_marginal(law, 1);
  if (law.particles() >= 2) {
    d.marginal2 = law.marginal(2);
    d.df_marginal2 = df_marginal(law, 2);
  }
  return d;
}

TVCheck tv_bound_check(const FiniteExchangeableLaw& law, int k) {
  if (k < 1 || k > law.particles()) throw ValidationError("need 1 <= k <= N");
  auto m = law.marginal(k);
  auto mt = df_marginal(law, k);
  TVCheck out;
  out.k = k;
  out.tv = 0;
  for (std::size_t i = 0; i < m.size(); ++i) out.tv += abs(m[i] - mt[i]);
  out.bound = Rational(2 * k * (k - 1), law.particles());
  out.pass = out.tv <= out.bound;
  return out;
}

}  // namespace fermigas
