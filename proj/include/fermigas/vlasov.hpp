#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fermigas/model.hpp"
#include "fermigas/tf_solver.hpp"

namespace fermigas {

// Cell-centred momentum grid on [-P, P]^d.
class MomentumGrid {
 public:
  MomentumGrid(Dimension d, double half_width, int points);

  Dimension dim() const noexcept { return d_; }
  double half_width() const noexcept { return half_; }
  int points() const noexcept { return m_; }
  double spacing() const noexcept { return dp_; }
  std::size_t size() const noexcept;
  double cell_volume() const noexcept;
  double coordinate(int j) const noexcept { return -half_ + (j + 0.5) * dp_; }
  Point point(std::size_t flat) const noexcept;

 private:
  Dimension d_;
  double half_;
  int m_;
  double dp_;
};

class PhaseSpaceDensity {
 public:
  // m(x_i, p) = 1(|p| <= radii[i])
  static PhaseSpaceDensity indicator(SpatialGrid x, MomentumGrid p, std::vector<double> radii);
  // values[i * p.size() + j] = m(x_i, p_j)
  static PhaseSpaceDensity tabulated(SpatialGrid x, MomentumGrid p, std::vector<double> values);

  const SpatialGrid& spatial_grid() const noexcept { return x_; }
  const MomentumGrid& momentum_grid() const noexcept { return p_; }
  bool is_indicator() const noexcept { return indicator_; }
  const std::vector<double>& radii() const;

  double value(std::size_t ix, std::size_t jp) const;
  // Ball integrals are analytic for indicators, momentum-cell sums otherwise.
  DensityField spatial_density() const;
  std::vector<double> kinetic_density() const;  // (2pi)^{-d} \int |p|^2 m(x, p) dp
  double normalization() const;                 // (2pi)^{-d} \iint m
  double max_value() const;
  bool pauli_bound_ok(double tol = 1e-12) const { return max_value() <= 1.0 + tol; }

 private:
  PhaseSpaceDensity(SpatialGrid x, MomentumGrid p) : x_(x), p_(p) {}
  SpatialGrid x_;
  MomentumGrid p_;
  bool indicator_ = false;
  std::vector<double> radii_, values_;
};

// Required momentum half-width for lifting rho: 1.1 c_d (max rho)^{1/d}.
double required_momentum_half_width(const DensityField& rho, const TFConstants& constants);

PhaseSpaceDensity bathtub_lift(const DensityField& rho, const TFConstants& constants,
                               const MomentumGrid& p);
// Momentum grid sized automatically with 25% margin.
PhaseSpaceDensity bathtub_lift(const DensityField& rho, const TFConstants& constants);

struct VlasovReport {
  std::string mode;  // "singular" or "scaled"
  double kinetic = 0;
  double potential = 0;
  double pair_integral = 0;  // \iint w_N rho rho, or I_w \int rho^2
  double interaction = 0;    // -pair_integral
  double total = 0;
  double normalization = 0;
  DensityField rho_m;
};

VlasovReport vlasov_energy(const PhaseSpaceDensity& m, const std::vector<double>& v, double i_w);
VlasovReport vlasov_energy(const PhaseSpaceDensity& m, const TrapPotential& v, double i_w);
VlasovReport vlasov_energy(const PhaseSpaceDensity& m, const std::vector<double>& v,
                           const ScaledInteraction& w_n);
VlasovReport vlasov_energy(const PhaseSpaceDensity& m, const TrapPotential& v,
                           const ScaledInteraction& w_n);

// \iint w_N(x - y) rho(x) rho(y), direct sum over offsets inside the support of w_N.
double pair_integral(const DensityField& rho, const ScaledInteraction& w_n);

struct EqualityReport {
  double e_tf = 0;
  double e_vlasov = 0;
  double relative_difference = 0;
  double kinetic_tf = 0;
  double kinetic_vlasov = 0;
  double kinetic_ratio = 0;  // kinetic_tf / kinetic_vlasov
  double lift_normalization = 0;
  bool pass = false;
  std::optional<std::string> warning;
};

EqualityReport tf_vlasov_equality_check(const TrapPotential& v, const TFConstants& constants,
                                        double i_w, const SpatialGrid& grid, double tol = 1e-3,
                                        SolverOptions opts = {});

}  // namespace fermigas
