#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <map>
#include <vector>

#include "fermigas/errors.hpp"

namespace fermigas {

using Rational = boost::multiprecision::cpp_rational;

// Occupation counts c_0..c_{S-1} of a multiset of N states.
using Counts = std::vector<int>;

constexpr double kDefaultEnumerationCap = 1e7;

// Number of multisets of size N drawn from S states.
double multiset_count(int states, int particles);
// Calls visit(counts) for every multiset in lexicographic order of counts.
void for_each_multiset(int states, int particles, const std::function<void(const Counts&)>& visit,
                       double cap = kDefaultEnumerationCap);
// N! / prod c_s!
Rational multinomial(const Counts& c);

// Symmetric law on {0..S-1}^N kept as the total weight of each multiset, i.e. the
// probability that the unordered sample equals that multiset.  Symmetric by construction.
class FiniteExchangeableLaw {
 public:
  FiniteExchangeableLaw(int states, int particles, std::map<Counts, Rational> weights);

  // Uniform on all S^N tuples.
  static FiniteExchangeableLaw uniform(int states, int particles);
  // sigma^{(x) N}; sigma must sum to 1.
  static FiniteExchangeableLaw product(const std::vector<Rational>& sigma, int particles);
  // Law with tuple probability proportional to p(sorted tuple).  Doubles are
  // converted exactly, then renormalised in rational arithmetic.
  static FiniteExchangeableLaw from_symmetric_function(
      int states, int particles, const std::function<double(const std::vector<int>&)>& p,
      double cap = kDefaultEnumerationCap);
  // Dense tuple probabilities, index s_1 S^{N-1} + ... + s_N.  Throws when the table
  // is not permutation invariant.
  static FiniteExchangeableLaw from_tuples(int states, int particles,
                                           const std::vector<Rational>& p);

  int states() const noexcept { return s_; }
  int particles() const noexcept { return n_; }
  const std::map<Counts, Rational>& weights() const noexcept { return w_; }
  Rational total() const;

  // Probability of one ordered tuple.
  Rational tuple_probability(const std::vector<int>& tuple) const;
  // k-th marginal on {0..S-1}^k, same dense indexing as from_tuples.
  std::vector<Rational> marginal(int k) const;

 private:
  int s_, n_;
  std::map<Counts, Rational> w_;
};

struct EmpiricalAtom {
  Counts counts;   // Emp = N^{-1} sum_s c_s delta_s
  Rational weight; // P^DF mass of this empirical measure
};

struct DFDecomposition {
  int states = 0, particles = 0;
  std::vector<EmpiricalAtom> atoms;
  std::vector<Rational> marginal1, marginal2;        // of the law
  std::vector<Rational> df_marginal1, df_marginal2;  // of \int sigma^{(x)N} dP^DF
};

// k-th marginal of the mixture \int sigma^{(x) N} dP^DF(sigma).
std::vector<Rational> df_marginal(const FiniteExchangeableLaw& law, int k);
// Marginals for k <= 2 (only k = 1 when N = 1).
DFDecomposition df_decomposition(const FiniteExchangeableLaw& law);

struct TVCheck {
  int k = 0;
  Rational tv;     // sum over S^k of |m^{(k)} - m~^{(k)}|
  Rational bound;  // 2k(k-1)/N
  bool pass = false;
};

TVCheck tv_bound_check(const FiniteExchangeableLaw& law, int k);

}  // namespace fermigas
