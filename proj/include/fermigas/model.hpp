#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fermigas/errors.hpp"

namespace fermigas {

class Dimension {
 public:
  explicit Dimension(int d);
  int value() const noexcept { return d_; }
  friend bool operator==(Dimension, Dimension) = default;

 private:
  int d_;
};

// Position (or momentum) in R^d; the second slot stays 0 when d = 1.
using Point = std::array<double, 2>;

inline double norm(const Point& x) { return std::hypot(x[0], x[1]); }

enum class ConstantsConvention { PaperLiteral, BathTubConsistent };

std::string to_string(ConstantsConvention c);
ConstantsConvention constants_convention_from_string(const std::string& s);

struct TFConstants {
  Dimension d{1};
  double c_tf = 0.0;
  double c_d = 0.0;
  ConstantsConvention source = ConstantsConvention::BathTubConsistent;

  static TFConstants make(Dimension d, ConstantsConvention source);
  // Fermi radius c_d rho^{1/d}.
  double fermi_radius(double rho) const;
};

// Kinetic energy density (2pi)^{-d} \int_{|p| <= c_d rho^{1/d}} |p|^2 dp.
double lift_kinetic_density(Dimension d, double c_d, double rho);

struct GrowthBounds {
  double s = 2.0;          // V(x) >= C|x|^s - c
  double lower_c = 1.0;    // C
  double lower_shift = 0;  // c
  double gradient_c = 2.0; // |grad V| <= C_g (|x|^{s-1} + 1)
};

struct ProbeOptions {
  double radius = 8.0;
  int points_per_axis_1d = 801;
  int points_per_axis_2d = 81;
  double slack = 1e-9;
};

class TrapPotential {
 public:
  using Value = std::function<double(const Point&)>;
  using Gradient = std::function<Point(const Point&)>;

  TrapPotential(Dimension d, std::string name, Value v, Gradient g, GrowthBounds bounds,
                bool level_sets_null, ProbeOptions probe = {});

  // V = k |x|^2
  static TrapPotential harmonic(Dimension d, double k = 1.0);
  // V = a |x|^4
  static TrapPotential quartic(Dimension d, double a = 1.0);
  // V = b (|x|^2 - a^2)^2, wells at |x| = a
  static TrapPotential double_well(Dimension d, double a = 1.5, double b = 1.0);

  Dimension dim() const noexcept { return d_; }
  const std::string& name() const noexcept { return name_; }
  const GrowthBounds& bounds() const noexcept { return bounds_; }
  bool level_sets_null() const noexcept { return level_sets_null_; }

  double operator()(const Point& x) const { return v_(x); }
  Point gradient(const Point& x) const { return g_(x); }

 private:
  Dimension d_;
  std::string name_;
  Value v_;
  Gradient g_;
  GrowthBounds bounds_;
  bool level_sets_null_;
};

enum class BetaRange { Theorem, UpperBoundOnly };

std::string to_string(BetaRange r);

class InteractionProfile {
 public:
  using Radial = std::function<double(double)>;

  // w(x) = profile(|x|) for |x| < support_radius, 0 beyond.  derivative may be
  // empty for profiles with jumps; then gradient_tv is used as the L1 norm of the
  // distributional gradient.
  InteractionProfile(Dimension d, std::string family, Radial profile, Radial derivative,
                     double support_radius, double beta, double gradient_tv = -1.0);

  static InteractionProfile indicator(Dimension d, double height, double radius, double beta);
  // height * exp(1 - 1/(1 - (r/R)^2)), equal to height at the origin.
  static InteractionProfile bump(Dimension d, double height, double radius, double beta);
  static InteractionProfile zero(Dimension d, double beta);

  Dimension dim() const noexcept { return d_; }
  const std::string& family() const noexcept { return family_; }
  double beta() const noexcept { return beta_; }
  BetaRange beta_range() const noexcept { return range_; }
  double support_radius() const noexcept { return radius_; }

  double radial(double r) const;
  double operator()(const Point& x) const { return radial(norm(x)); }
  double radial_derivative(double r) const;
  bool has_jumps() const noexcept { return !deriv_; }

  double integral() const noexcept { return i_w_; }
  double sup_norm() const noexcept { return sup_; }
  // ||grad w||_{L^1}, total variation for profiles with jumps.
  double gradient_l1() const noexcept { return grad_l1_; }
  // ||grad w||_{L^{1+d/2}}; infinite when w has jumps.
  double gradient_l_1pd2() const noexcept { return grad_lq_; }

  // d = 2 requires I_w < c_TF.
  void check_against(const TFConstants& constants) const;

 private:
  Dimension d_;
  std::string family_;
  Radial w_, deriv_;
  double radius_, beta_;
  BetaRange range_;
  double i_w_ = 0, sup_ = 0, grad_l1_ = 0, grad_lq_ = 0;
};

// x -> N^{d beta} w(N^beta x)
class ScaledInteraction {
 public:
  ScaledInteraction(std::shared_ptr<const InteractionProfile> w, double n);

  double n() const noexcept { return n_; }
  double amplitude() const noexcept { return amp_; }
  double length() const noexcept { return len_; }
  double support_radius() const noexcept { return w_->support_radius() * len_; }
  double integral() const noexcept { return w_->integral(); }
  double gradient_l1() const noexcept { return w_->gradient_l1() / len_; }
  const InteractionProfile& profile() const noexcept { return *w_; }

  double radial(double r) const { return amp_ * w_->radial(r / len_); }
  double operator()(const Point& x) const { return radial(norm(x)); }

 private:
  std::shared_ptr<const InteractionProfile> w_;
  double n_, amp_, len_;
};

ScaledInteraction scaled_interaction(std::shared_ptr<const InteractionProfile> w, double n);

// Cell-centred uniform grid on [-L, L]^d.
class SpatialGrid {
 public:
  SpatialGrid(Dimension d, double half_width, int points);

  Dimension dim() const noexcept { return d_; }
  double half_width() const noexcept { return half_; }
  int points() const noexcept { return m_; }
  double spacing() const noexcept { return h_; }
  std::size_t size() const noexcept;
  double cell_volume() const noexcept;

  double coordinate(int i) const noexcept { return -half_ + (i + 0.5) * h_; }
  Point point(std::size_t flat) const noexcept;
  std::size_t flat(int i, int j = 0) const noexcept {
    return static_cast<std::size_t>(i) * (d_.value() == 2 ? m_ : 1) + j;
  }

  friend bool operator==(const SpatialGrid&, const SpatialGrid&) = default;

 private:
  Dimension d_;
  double half_;
  int m_;
  double h_;
};

std::vector<double> sample(const TrapPotential& v, const SpatialGrid& grid);

// h^d * sum of values (midpoint rule; equal to the trapezoid rule for integrands
// that vanish at the box edge).
double integrate(const SpatialGrid& grid, const std::vector<double>& values);

class DensityField {
 public:
  DensityField(SpatialGrid grid, std::vector<double> values);
  static DensityField zeros(SpatialGrid grid);

  const SpatialGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double mass() const;
  double lp_norm_pow(double p) const;  // \int rho^p
  double max() const;

 private:
  SpatialGrid grid_;
  std::vector<double> values_;
};

struct ConstantsAudit {
  Dimension d{1};
  TFConstants paper_literal, bath_tub;
  double probe_mass = 0;
  // \int c_TF rho^{1+2/d} under each convention
  double tf_kinetic_paper = 0, tf_kinetic_bathtub = 0;
  // (2pi)^{-d} \iint |p|^2 m_rho evaluated with each convention's c_d
  double lift_kinetic_paper = 0, lift_kinetic_bathtub = 0;
  double mismatch_factor_paper = 0;  // tf_kinetic_paper / lift_kinetic_paper
};

// Default probe: normalized Gaussian on a modest grid.
ConstantsAudit audit_constants(Dimension d);
ConstantsAudit audit_constants(const DensityField& probe);

}  // namespace fermigas
