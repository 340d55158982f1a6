#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fermigas/df_measures.hpp"
#include "fermigas/model.hpp"

namespace fermigas {

struct PhasePoint {
  Point x{0, 0};
  Point p{0, 0};
};

// Euclidean distance in R^{2d}.
double phase_distance(const PhasePoint& a, const PhasePoint& b);

// Partition of S_L = [-L, L]^{2d} into boxes of side l_x in space and l_p in momentum.
class Tiling {
 public:
  // cells_x, cells_p: number of cells per spatial / momentum axis.
  Tiling(Dimension d, double half_width, int cells_x, int cells_p);

  // gamma = 4/(4d+1), l_x = N^{-2/(d(2d+1))}, l_p = N^{-2/(d(2d+1)(4d+1))},
  // L = n N^{-gamma/(2d)}; per-axis cell counts are rounded so the cells tile S_L.
  static Tiling paper_scaling(Dimension d, double particles, int n);

  Dimension dim() const noexcept { return d_; }
  double half_width() const noexcept { return half_; }
  int cells_x() const noexcept { return nx_; }
  int cells_p() const noexcept { return np_; }
  double l_x() const noexcept { return lx_; }
  double l_p() const noexcept { return lp_; }
  std::size_t cell_count() const noexcept;
  double cell_volume() const noexcept;  // l_x^d l_p^d
  double cell_diameter() const noexcept;
  double volume() const noexcept;       // (2L)^{2d}

  bool contains(const PhasePoint& z) const noexcept;
  // -1 outside S_L.  Points on the upper boundary belong to the last cell.
  long cell_of(const PhasePoint& z) const noexcept;
  PhasePoint cell_center(std::size_t j) const;
  // Lower corner and extent of cell j; coordinates ordered x1 [x2] p1 [p2].
  std::vector<double> cell_lower(std::size_t j) const;
  std::vector<double> cell_sides() const;

 private:
  Dimension d_;
  double half_;
  int nx_, np_;
  double lx_, lp_;
};

// Finite weighted sum of Dirac masses on phase space.
struct DiscreteMeasure {
  Dimension d{1};
  std::vector<PhasePoint> points;
  std::vector<double> weights;

  double mass() const;
  DiscreteMeasure restricted(const Tiling& t) const;
};

// N^{-1} sum_j delta_{z_j}; weights are exact rationals.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(Dimension d, std::vector<PhasePoint> points);

  Dimension dim() const noexcept { return d_; }
  int particles() const noexcept { return static_cast<int>(z_.size()); }
  const std::vector<PhasePoint>& points() const noexcept { return z_; }
  Rational weight() const { return Rational(1, particles()); }
  Rational total_mass() const { return weight() * particles(); }
  DiscreteMeasure as_discrete() const;

 private:
  Dimension d_;
  std::vector<PhasePoint> z_;
};

// Piecewise constant measure mu-bar = sum_j 1_{Omega_j} mu(Omega_j) / |Omega_j|.
struct AveragedMeasure {
  Tiling tiling;
  std::vector<double> cell_mass;
  std::vector<Rational> exact_cell_mass;  // filled for empirical sources
  double source_mass = 0;                 // mass of mu
  double outside_mass = 0;                // mass of mu outside S_L
  std::string source;                     // "empirical" or "discrete"

  double density(std::size_t j) const { return cell_mass[j] / tiling.cell_volume(); }
  double mass() const;
  // sub^{2d} equal point masses per cell at the sub-cell centres.
  DiscreteMeasure discretize(int sub) const;
};

AveragedMeasure average_measure(const DiscreteMeasure& mu, const Tiling& t);
AveragedMeasure average_measure(const EmpiricalMeasure& mu, const Tiling& t);

// Emp(Omega_j) >= (1 + eps)(2 pi)^{-d} |Omega_j|
bool violates_pauli(double cell_mass, double cell_volume, Dimension d, double eps);

using PhaseSampler = std::function<PhasePoint(std::mt19937_64&)>;
using ConfigurationSampler = std::function<void(std::mt19937_64&, std::vector<PhasePoint>&)>;

// i.i.d. uniform points on S_L.
PhaseSampler uniform_sampler(const Tiling& t);
// N i.i.d. draws from a one-body sampler.
ConfigurationSampler iid_configurations(PhaseSampler one, int particles);
// Draws a multiset from an exact law and places particles at the given state points.
ConfigurationSampler law_configurations(const FiniteExchangeableLaw& law,
                                        std::vector<PhasePoint> state_points);

struct PauliStats {
  int particles = 0;
  double epsilon = 0;
  int trials = 0;
  unsigned long long seed = 0;
  long cell = 0;
  double threshold_count = 0;  // N (1 + eps)(2 pi)^{-d} |Omega_j|
  long hits_cell = 0;
  double frequency_cell = 0;
  double ci_low = 0, ci_high = 0;  // Clopper-Pearson 95%
  long hits_any = 0;
  double frequency_any = 0;
  double any_ci_low = 0, any_ci_high = 0;
  std::optional<double> exact_tail;  // P(Bin(N, q) >= threshold) when q is supplied
  bool within_ci() const {
    return exact_tail && *exact_tail >= ci_low && *exact_tail <= ci_high;
  }
};

// Monte Carlo frequency of Gamma_eps^j and Gamma_eps.  Trials are split in blocks
// with their own seeded streams, so the result does not depend on the thread count.
PauliStats pauli_violation_stats(const ConfigurationSampler& sampler, int particles,
                                 const Tiling& t, long cell, double epsilon, int trials,
                                 unsigned long long seed,
                                 std::optional<double> cell_probability = std::nullopt);

// P(Bin(n, q) >= ceil(threshold))
double binomial_upper_tail(int n, double q, double threshold);

struct DecayFit {
  std::vector<double> n, frequency;
  double delta = 0;
  double slope = 0;      // of log frequency against N^delta
  double intercept = 0;
  double rate = 0;       // c_delta = -slope / ln(1 + eps)
  int used = 0;          // points with nonzero frequency
};

DecayFit fit_pauli_decay(const std::vector<double>& n, const std::vector<double>& frequency,
                         double delta, double epsilon);

// E_N[mu] = \iint (|p|^2 + V) dmu - \iint w_N(x - y) dmu dmu
struct MeasureEnergy {
  double one_body = 0;
  double interaction = 0;
  double total = 0;
};

MeasureEnergy measure_energy(const DiscreteMeasure& mu, const TrapPotential& v,
                             const ScaledInteraction* w_n);
// One-body part integrated cell by cell, interaction on sub-cell points.
MeasureEnergy measure_energy(const AveragedMeasure& mu, const TrapPotential& v,
                             const ScaledInteraction* w_n, int sub = 4);

struct RestrictionReport {
  double energy = 0;             // E_N[mu]
  double energy_restricted = 0;  // E_N[mu 1_{S_L}]
  double energy_averaged = 0;    // E_N[mu-bar]
  double restriction_defect = 0; // E_N[mu] - E_N[mu 1_{S_L}]
  double averaging_defect = 0;   // E_N[mu 1_{S_L}] - E_N[mu-bar]
  double tau = 0;
  bool tau_ok = true;
  double restriction_shape = 0;  // tau^2 N^{d beta} / min(L^4, L^{2s})
  double averaging_shape = 0;    // (l_x + l_p)(|E_N[mu-bar]| + 1)
  double restriction_fitted_c = 0;
  double averaging_fitted_c = 0;
  double lost_mass = 0;
};

RestrictionReport restriction_energy_defect(const DiscreteMeasure& mu, const Tiling& t,
                                            const TrapPotential& v, const ScaledInteraction* w_n,
                                            double tau, int sub = 4);

}  // namespace fermigas
