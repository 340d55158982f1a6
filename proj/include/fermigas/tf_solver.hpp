#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "fermigas/model.hpp"

namespace fermigas {

struct EnergyBreakdown {
  double kinetic = 0;      // c_TF \int rho^{1+2/d}
  double potential = 0;    // \int V rho
  double interaction = 0;  // -I_w \int rho^2
  double total = 0;
};

// E^TF on a grid with pre-sampled V.  No constraint on I_w versus c_TF, so this
// doubles as the forced-evaluation path.
EnergyBreakdown tf_energy(const DensityField& rho, const std::vector<double>& v_samples,
                          double c_tf, double i_w);
EnergyBreakdown tf_energy(const DensityField& rho, const TrapPotential& v,
                          const TFConstants& constants, double i_w);

// e(t) = c t^3 - I t^2 + alpha t with alpha = I^2/(4c): zero at 0 and at rho_alpha = I/(2c).
class RelaxedLocalEnergy {
 public:
  RelaxedLocalEnergy(double c_tf, double i_w, double eta = 0.5);

  double c_tf() const noexcept { return c_; }
  double i_w() const noexcept { return i_; }
  double eta() const noexcept { return eta_; }
  double alpha() const noexcept { return alpha_; }
  double rho_alpha() const noexcept { return rho_alpha_; }

  double e(double t) const noexcept { return ((c_ * t - i_) * t + alpha_) * t; }
  double de(double t) const noexcept { return (3.0 * c_ * t - 2.0 * i_) * t + alpha_; }
  double j(double t) const noexcept { return t >= rho_alpha_ ? e(t) : 0.0; }

  // The same construction with c replaced by (1 - eta) c; alpha and the jump
  // point follow so that the two zeros are kept.
  RelaxedLocalEnergy eta_variant() const;
  double e_eta(double t) const { return eta_variant().e(t); }
  double j_eta(double t) const { return eta_variant().j(t); }

  // Larger root of 3c t^2 - 2I t = lambda - V, or nullopt if none is real.
  std::optional<double> larger_root(double lambda_minus_v) const noexcept;

  // argmin_{t >= 0} J(t) + (V - alpha - lambda) t; ties go to 0.
  double select(double v, double lambda) const noexcept;

 private:
  double c_, i_, eta_, alpha_, rho_alpha_;
};

struct SolverOptions {
  double mass_tol = 1e-8;
  int max_iterations = 400;
};

struct TFSolution {
  explicit TFSolution(DensityField r) : rho(std::move(r)) {}

  DensityField rho;
  double lambda = 0;
  EnergyBreakdown energy;
  double c_tf = 0, i_w = 0;
  double el_residual = 0;     // sup over supp(rho) of the EL defect
  double complement_min = 0;  // min over the complement of (V - alpha - lambda)
  double mass_gap = 0;        // |\int rho - 1|
  // min of rho over grid points whose neighbours are all occupied; NaN if none
  double jump_min = std::numeric_limits<double>::quiet_NaN();
  bool touches_boundary = false;
  int iterations = 0;
};

struct ELResidual {
  double support_defect = 0;
  double complement_min = std::numeric_limits<double>::infinity();
  std::size_t support_size = 0;
  bool support_empty() const noexcept { return support_size == 0; }
  bool valid(double tol) const noexcept {
    return support_defect <= tol && complement_min >= -tol;
  }
};

// Dispatches on the grid dimension: d = 1 uses the relaxed system
// e'(rho) 1(rho >= rho_alpha) + V - alpha = lambda, d = 2 uses 2(c - I) rho + V = lambda.
ELResidual el_residual(const DensityField& rho, double lambda, const std::vector<double>& v,
                       double c_tf, double i_w);
ELResidual el_residual(const TFSolution& sol, const std::vector<double>& v,
                       const RelaxedLocalEnergy& rel);
// lambda chosen to minimise the sup defect on the support.
ELResidual el_residual_best_lambda(const DensityField& rho, const std::vector<double>& v,
                                   double c_tf, double i_w);

double density_jump_min(const DensityField& rho);

// Mass of the pointwise selection at a given chemical potential.
DensityField density_at_lambda_2d(const std::vector<double>& v, const SpatialGrid& grid,
                                  double kappa, double lambda);
DensityField density_at_lambda_1d(const std::vector<double>& v, const SpatialGrid& grid,
                                  const RelaxedLocalEnergy& rel, double lambda);

TFSolution minimize_2d(const TrapPotential& v, const TFConstants& constants, double i_w,
                       const SpatialGrid& grid, SolverOptions opts = {});
// Raw variant used when the model layer has already been bypassed.
TFSolution minimize_2d(const std::vector<double>& v, const SpatialGrid& grid, double c_tf,
                       double i_w, SolverOptions opts = {});

TFSolution minimize_1d_relaxed(const TrapPotential& v, const RelaxedLocalEnergy& rel,
                               const SpatialGrid& grid, SolverOptions opts = {});
TFSolution minimize_1d_relaxed(const std::vector<double>& v, const SpatialGrid& grid,
                               const RelaxedLocalEnergy& rel, SolverOptions opts = {});

// \int J(rho) + \int V rho - alpha \int rho
double relaxed_energy(const DensityField& rho, const std::vector<double>& v,
                      const RelaxedLocalEnergy& rel);

struct RelaxationReport {
  double e_tf = 0;
  double e_tf_j = 0;
  double difference = 0;
  double jump_min = 0;
  bool jump_ok = false;
  bool pass = false;
};

RelaxationReport relaxation_equivalence_check(const std::vector<double>& v,
                                              const SpatialGrid& grid,
                                              const RelaxedLocalEnergy& rel, double tol,
                                              SolverOptions opts = {});
RelaxationReport relaxation_equivalence_check(const TrapPotential& v, const RelaxedLocalEnergy& rel,
                                              const SpatialGrid& grid, double tol,
                                              SolverOptions opts = {});

}  // namespace fermigas
