#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "fermigas/husimi.hpp"
#include "fermigas/lanczos.hpp"
#include "fermigas/model.hpp"
#include "fermigas/vlasov.hpp"

namespace fermigas {

constexpr double kDefaultBasisCap = 2e6;

double binomial(int n, int k);

// All placements of N spinless fermions on M sites, one bit per site, ranked in
// colexicographic order (combinatorial number system).
class OccupationBasis {
 public:
  OccupationBasis(int sites, int particles, double cap = kDefaultBasisCap);

  int sites() const noexcept { return m_; }
  int particles() const noexcept { return n_; }
  std::size_t size() const noexcept { return configs_.size(); }
  std::uint64_t config(std::size_t r) const { return configs_[r]; }
  std::size_t rank(std::uint64_t mask) const;

 private:
  int m_, n_;
  std::vector<std::uint64_t> configs_;
  std::vector<std::vector<std::uint64_t>> choose_;
};

// H_N = sum_j (-hbar^2 Lap_j + V(x_j)) - N^{-1} sum_{j<k} w_N(x_j - x_k) on a 1D grid,
// three-point Laplacian with Dirichlet ends.
class DiscreteHamiltonian {
 public:
  DiscreteHamiltonian(SpatialGrid grid, int particles, std::vector<double> v,
                      std::optional<ScaledInteraction> w_n, double cap = kDefaultBasisCap);
  // hbar overrides the default N^{-1}.
  DiscreteHamiltonian(SpatialGrid grid, int particles, std::vector<double> v,
                      std::optional<ScaledInteraction> w_n, double hbar, double cap);

  const SpatialGrid& grid() const noexcept { return grid_; }
  int particles() const noexcept { return n_; }
  double hbar() const noexcept { return hbar_; }
  double hopping() const noexcept { return t_; }
  const std::vector<double>& potential() const noexcept { return v_; }
  const std::vector<double>& pair_coupling() const noexcept { return pair_; }  // by |i - j|
  const std::optional<ScaledInteraction>& interaction() const noexcept { return w_n_; }
  std::shared_ptr<const OccupationBasis> basis() const noexcept { return basis_; }
  std::size_t dimension() const noexcept { return basis_->size(); }

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
  // One-body part -hbar^2 Lap + V as an M x M matrix.
  Eigen::MatrixXd one_body_matrix() const;

 private:
  void build();
  SpatialGrid grid_;
  int n_;
  std::vector<double> v_;
  std::optional<ScaledInteraction> w_n_;
  double hbar_, t_;
  std::vector<double> pair_;
  std::shared_ptr<const OccupationBasis> basis_;
  std::vector<double> diag_;
  std::vector<std::size_t> hop_start_;
  std::vector<std::uint32_t> hop_to_;
};

struct FermionState {
  std::shared_ptr<const OccupationBasis> basis;
  SpatialGrid grid;
  Eigen::VectorXd coeffs;

  FermionState(std::shared_ptr<const OccupationBasis> b, SpatialGrid g, Eigen::VectorXd c);
  int particles() const noexcept { return basis->particles(); }
};

struct GroundState {
  double energy = 0;
  FermionState state;
  double residual = 0;
  int iterations = 0;
  std::string method;
};

GroundState ground_state(const DiscreteHamiltonian& h, double tol = 1e-9);

double expectation(const DiscreteHamiltonian& h, const FermionState& s);

// Slater determinant of l^2-orthonormal real orbitals (columns, M x N).
FermionState slater_state(std::shared_ptr<const OccupationBasis> basis, SpatialGrid grid,
                          const Eigen::MatrixXd& orbitals);

// Lowest one-body eigenvalues/eigenvectors of -hbar^2 Lap + V (vectors l^2-normalised).
Eigen::VectorXd one_body_spectrum(const DiscreteHamiltonian& h);
Eigen::MatrixXd one_body_orbitals(const DiscreteHamiltonian& h, int count);

struct ReducedDensities {
  DensityField rho1;
  Eigen::MatrixXd rho2;  // empty when k = 1; rho2(i, i) = 0
  OneBodyOperator gamma1;
  Eigen::VectorXd occupations;  // natural occupations, descending
};

ReducedDensities reduced_densities(const FermionState& s, int k);

// m^{(1)}(z) = ||b_z Psi||^2 and m^{(2)}(z1, z2) = ||b_{z2} b_{z1} Psi||^2 with b_z the
// annihilator of the coherent mode f_z.
double husimi1(const FermionState& s, const CoherentFamily& family, const Point& x, const Point& p);
double husimi2(const FermionState& s, const CoherentFamily& family, const Point& x1,
               const Point& p1, const Point& x2, const Point& p2);
// |<f_{z_1} ^ ... ^ f_{z_N}, Psi>|^2 for l^2 mode vectors.
double nbody_husimi(const FermionState& s, const std::vector<Eigen::VectorXcd>& modes);
// l^2 coherent mode on the state's grid.
Eigen::VectorXcd coherent_mode(const CoherentFamily& family, const SpatialGrid& grid,
                               const Point& x, const Point& p);

struct SlaterBound {
  double trial_energy = 0;
  double ground_energy = 0;
  Eigen::VectorXd occupations;  // leading N eigenvalues of gamma^hbar
  double gamma_trace = 0;
  bool pass = false;
};

SlaterBound slater_upper_bound(const PhaseSpaceDensity& m, const CoherentFamily& family,
                               const DiscreteHamiltonian& h, double tol = 1e-10);
SlaterBound slater_upper_bound(const OneBodyOperator& gamma, const DiscreteHamiltonian& h,
                               double ground_energy, double tol = 1e-10);

struct AprioriReport {
  int n = 0;
  double beta = 0;
  double one_body = 0;              // <sum (-hbar^2 Lap + V)>
  double interaction_integral = 0;  // N^{-1} \iint w_N rho^{(2)}
  double w_norm = 0;                // ||w_N||_{L^{1+d/2}}
  double reference_one_body = 0;    // N^{1 + beta d/2}
  double reference_interaction = 0; // N^{1 + beta d^2/(2(d+2))}
};

AprioriReport apriori_diagnostics(const FermionState& s, const DiscreteHamiltonian& h);

}  // namespace fermigas
