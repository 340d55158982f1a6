#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "fermigas/model.hpp"
#include "fermigas/tf_solver.hpp"
#include "fermigas/vlasov.hpp"

namespace fermigas {

using cplx = std::complex<double>;

// Radial C-infinity bump exp(-a r^2/(1 - r^2)) on the unit ball, scaled to unit L^2 norm.
class Envelope {
 public:
  explicit Envelope(Dimension d, double sharpness = 4.0);

  Dimension dim() const noexcept { return d_; }
  double sharpness() const noexcept { return a_; }
  double operator()(double r) const;
  double derivative(double r) const;
  double gradient_norm_sq() const noexcept { return grad_sq_; }  // ||grad f||^2
  double l2_norm() const noexcept { return l2_; }                 // 1 up to quadrature

 private:
  Dimension d_;
  double a_, scale_ = 1.0, grad_sq_ = 0, l2_ = 0;
};

struct CoherentFamily {
  Envelope f;
  double hbar = 0, hbar_x = 0, hbar_p = 0;

  // hbar = N^{-1/d}, hbar_x = N^{-beta-1/d}, hbar_p = N^{beta-1/d}
  static CoherentFamily for_particles(double n, double beta, Envelope f);
  // hbar_p = hbar^2 / hbar_x
  static CoherentFamily with_hbar_x(double n, double hbar_x, Envelope f);

  Dimension dim() const noexcept { return f.dim(); }
  double particles() const noexcept { return std::pow(hbar, -f.dim().value()); }
  double width() const noexcept { return std::sqrt(hbar_x); }
  // f^hbar(y) = hbar_x^{-d/4} f(|y| / sqrt(hbar_x))
  double scaled(double r) const;
};

// Grid samples of f^hbar_{x,p}(y) = f^hbar(y - x) e^{i p.y / hbar}.  The envelope is
// wrapped periodically on the box and normalised so that h^d sum |.|^2 = 1.
std::vector<cplx> coherent_state(const Point& x, const Point& p, const CoherentFamily& family,
                                 const SpatialGrid& grid);

// Periodic phase-space lattice of a 1D grid: x_i grid points, p_q = hbar 2 pi q / (M h).
struct PhaseLattice {
  SpatialGrid grid;
  double hbar;

  PhaseLattice(SpatialGrid g, double hbar);
  int size() const noexcept { return grid.points(); }
  double dx() const noexcept { return grid.spacing(); }
  double dp() const noexcept;
  int q(int j) const noexcept { return j - grid.points() / 2; }
  double momentum(int j) const noexcept { return q(j) * dp(); }
};

// Operator on L^2 of a 1D grid, stored in the l^2-orthonormal site basis.
class OneBodyOperator {
 public:
  OneBodyOperator(SpatialGrid grid, Eigen::MatrixXcd site_matrix);
  static OneBodyOperator zero(SpatialGrid grid);
  // gamma = sum_n occ_n |u_n><u_n| with u_n given as L^2-normalised function samples.
  static OneBodyOperator from_orbitals(SpatialGrid grid, const Eigen::MatrixXcd& orbitals,
                                       const Eigen::VectorXd& occupations);

  const SpatialGrid& grid() const noexcept { return grid_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return mat_; }

  double trace() const;
  double trace_of_square() const;
  DensityField density() const;
  Eigen::VectorXd eigenvalues() const;
  double hermiticity_defect() const;
  bool is_density_matrix(double tol = 1e-10) const;

 private:
  SpatialGrid grid_;
  Eigen::MatrixXcd mat_;
};

enum class KineticStencil { Spectral, ThreePoint };

// hbar^2 (-Laplacian) in the site basis; ThreePoint uses Dirichlet ends.
Eigen::MatrixXd kinetic_matrix(const SpatialGrid& grid, double hbar, KineticStencil stencil);

// Slater state of the N lowest orbitals of hbar^2(-Lap) + V.
OneBodyOperator free_fermion_gamma(const SpatialGrid& grid, const std::vector<double>& v,
                                   double hbar, int n,
                                   KineticStencil stencil = KineticStencil::Spectral);

struct HusimiTable {
  int k = 1;
  std::vector<double> x, p;
  Eigen::MatrixXd values;  // values(i, j) = m(x_i, p_j)
  double max() const { return values.size() ? values.maxCoeff() : 0.0; }
  double min() const { return values.size() ? values.minCoeff() : 0.0; }
};

// m^{(1)}(x_i, p_j) = <f_{x_i,p_j}, gamma f_{x_i,p_j}> on the full phase lattice.
HusimiTable husimi(const OneBodyOperator& gamma, const CoherentFamily& family);
// Two-body Husimi of a Slater state via the Wick rule, at paired sample points.
std::vector<double> husimi2_slater(const OneBodyOperator& gamma, const CoherentFamily& family,
                                   const std::vector<std::pair<Point, Point>>& z1,
                                   const std::vector<std::pair<Point, Point>>& z2);

// Semiclassical momentum density t(p_j) = (2 pi hbar)^{-1} \iint gamma(y,y') e^{-ip(y-y')/hbar}.
std::vector<double> momentum_density(const OneBodyOperator& gamma, double hbar);
// |g^hbar|^2 on the momentum lattice (the Fourier side of the envelope).
std::vector<double> momentum_envelope(const CoherentFamily& family, const SpatialGrid& grid);
// |f^hbar|^2 offsets on the grid, index n = periodic offset.
std::vector<double> position_envelope(const CoherentFamily& family, const SpatialGrid& grid);

struct ResolutionCheck {
  double max_relative_error = 0;
  int vectors = 0;
};
// Applies h dp sum_{i,j} |f_{ij}><f_{ij}| to random vectors and compares to (2 pi hbar) psi.
ResolutionCheck resolution_of_identity(const CoherentFamily& family, const SpatialGrid& grid,
                                       int vectors, unsigned long long seed);

struct MarginalCheck {
  double trace_identity = 0;  // (2pi)^{-1} hbar^{-1}... normalised so that it equals tr(gamma)/N
  double position_l1 = 0;     // || N (2pi)^{-1} \int m dp - rho * |f|^2 ||_{L1}
  double momentum_l1 = 0;     // || N (2pi)^{-1} \int m dx - t * |g|^2 ||_{L1}
  double position_mass = 0;
  double momentum_mass = 0;
};
MarginalCheck marginal_identities(const OneBodyOperator& gamma, const CoherentFamily& family);

// gamma^hbar = (2 pi hbar)^{-1} \iint m(x,p) |f_{x,p}><f_{x,p}| dx dp, discretised on the
// phase lattice of the operator grid with m averaged over each momentum cell.
OneBodyOperator gamma_from_measure(const PhaseSpaceDensity& m, const CoherentFamily& family,
                                   const SpatialGrid& grid);

struct HartreeBreakdown {
  double kinetic = 0, potential = 0, interaction = 0, total = 0;
};

HartreeBreakdown hartree_energy(const OneBodyOperator& gamma, const std::vector<double>& v,
                                const ScaledInteraction& w_n, double n, double hbar,
                                KineticStencil stencil = KineticStencil::Spectral);

struct SmearingDefect {
  double hbar_x = 0;
  double l1_defect = 0;  // || v - v * |f^hbar|^2 * |f^hbar|^2 ||_{L1}
  double gradient_l1 = 0;
  double ratio = 0;      // l1_defect / (sqrt(hbar_x) gradient_l1)
};
// 1D, computed on a fine auxiliary grid resolving sqrt(hbar_x).
SmearingDefect smearing_defect(const ScaledInteraction& v, const CoherentFamily& family,
                               int points_per_width = 100);

struct SemiclassicalReport {
  double n = 0, hbar = 0, hbar_x = 0, hbar_p = 0;
  double trace = 0;
  double kinetic_phase_space = 0;   // (2pi)^{-1} \iint p^2 m
  double kinetic_operator = 0;      // N^{-1} tr(-hbar^2 Lap gamma)
  double kinetic_correction = 0;    // difference of the two
  double kinetic_correction_exact = 0;  // (tr gamma / N) hbar_p ||f'||^2
  double potential_smearing = 0;    // (2pi)^{-1} \iint V m - N^{-1} tr(V gamma)
  double potential_fitted_c = 0;    // potential_smearing / hbar_x
  double interaction_smearing = 0;  // smearing_defect(w_N).l1_defect
  double interaction_bound_shape = 0;  // sqrt(hbar_x) ||grad w_N||_{L1}
  double interaction_fitted_c = 0;
  double pauli_max = 0;             // max of m over the lattice
};

SemiclassicalReport semiclassical_error_decomposition(const OneBodyOperator& gamma,
                                                      const CoherentFamily& family,
                                                      const std::vector<double>& v,
                                                      const ScaledInteraction& w_n);

}  // namespace fermigas
