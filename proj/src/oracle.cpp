#include "fermigas/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "fermigas/quadrature.hpp"

namespace fermigas {

namespace {

int popcount(std::uint64_t x) { return std::popcount(x); }

// occupied sites strictly between a and b
int between(std::uint64_t mask, int a, int b) {
  if (a > b) std::swap(a, b);
  if (b - a < 2) return 0;
  const std::uint64_t span = ((std::uint64_t{1} << b) - 1) & ~((std::uint64_t{1} << (a + 1)) - 1);
  return popcount(mask & span);
}

int below(std::uint64_t mask, int k) { return popcount(mask & ((std::uint64_t{1} << k) - 1)); }

std::vector<int> sites_of(std::uint64_t mask) {
  std::vector<int> s;
  while (mask) {
    s.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return s;
}

Eigen::VectorXcd annihilate(const OccupationBasis& from, const Eigen::VectorXcd& x,
                            const OccupationBasis& to, const Eigen::VectorXcd& mode) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(to.size()));
  for (std::size_t c = 0; c < from.size(); ++c) {
    const cplx xc = x[static_cast<Eigen::Index>(c)];
    if (xc == cplx(0.0)) continue;
    const std::uint64_t mask = from.config(c);
    for (int k : sites_of(mask)) {
      const double sign = below(mask, k) % 2 ? -1.0 : 1.0;
      out[static_cast<Eigen::Index>(to.rank(mask & ~(std::uint64_t{1} << k)))] +=
          sign * std::conj(mode[k]) * xc;
    }
  }
  return out;
}

}  // namespace

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

OccupationBasis::OccupationBasis(int sites, int particles, double cap)
    : m_(sites), n_(particles) {
  if (sites < 1) throw ValidationError("occupation basis needs at least one site");
  if (particles < 0 || particles > sites)
    throw ValidationError("particle count must lie in [0, sites]");
  const double dim = binomial(sites, particles);
  if (dim > cap) {
    std::ostringstream os;
    os << "basis size C(" << sites << ", " << particles << ") = " << static_cast<long long>(dim)
       << " exceeds the cap " << static_cast<long long>(cap);
    throw CapError(os.str());
  }
  // one bit per site in a 64-bit word
  if (sites > 63) throw CapError("occupation basis supports at most 63 sites");
  choose_.assign(m_ + 1, std::vector<std::uint64_t>(n_ + 2, 0));
  for (int a = 0; a <= m_; ++a) {
    choose_[a][0] = 1;
    for (int b = 1; b <= std::min(a, n_ + 1); ++b)
      choose_[a][b] = choose_[a - 1][b - 1] + (b <= a - 1 ? choose_[a - 1][b] : 0);
  }
  configs_.reserve(static_cast<std::size_t>(dim));
  if (n_ == 0) {
    configs_.push_back(0);
    return;
  }
  std::uint64_t v = (std::uint64_t{1} << n_) - 1;
  const std::uint64_t limit = std::uint64_t{1} << m_;
  while (v < limit) {
    configs_.push_back(v);
    const std::uint64_t t = v | (v - 1);
    v = (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
  }
}

std::size_t OccupationBasis::rank(std::uint64_t mask) const {
  std::size_t r = 0;
  int t = 1;
  while (mask) {
    const int pos = std::countr_zero(mask);
    r += choose_[pos][t];
    ++t;
    mask &= mask - 1;
  }
  return r;
}

// ---------------------------------------------------------------------------

DiscreteHamiltonian::DiscreteHamiltonian(SpatialGrid grid, int particles, std::vector<double> v,
                                         std::optional<ScaledInteraction> w_n, double cap)
    : DiscreteHamiltonian(grid, particles, std::move(v), std::move(w_n),
                          1.0 / std::max(1, particles), cap) {}

DiscreteHamiltonian::DiscreteHamiltonian(SpatialGrid grid, int particles, std::vector<double> v,
                                         std::optional<ScaledInteraction> w_n, double hbar,
                                         double cap)
    : grid_(grid), n_(particles), v_(std::move(v)), w_n_(std::move(w_n)), hbar_(hbar) {
  if (grid.dim().value() != 1) throw ValidationError("the many-body oracle is one-dimensional");
  if (particles < 1) throw ValidationError("oracle needs at least one particle");
  if (v_.size() != grid.size()) throw ValidationError("grid mismatch: V has the wrong size");
  if (!(hbar > 0)) throw ValidationError("hbar must be positive");
  const double h = grid.spacing();
  t_ = hbar_ * hbar_ / (h * h);
  pair_.assign(grid.points(), 0.0);
  if (w_n_) {
    const auto& w = *w_n_;
    if (w.profile().dim().value() != 1) throw ValidationError("oracle interaction must be 1D");
    for (int d = 1; d < grid.points(); ++d) pair_[d] = -w.radial(d * h) / particles;
  }
  basis_ = std::make_shared<OccupationBasis>(grid.points(), particles, cap);
  build();
}

void DiscreteHamiltonian::build() {
  const std::size_t dim = basis_->size();
  const int m = grid_.points();
  diag_.assign(dim, 0.0);
  hop_start_.assign(dim + 1, 0);
  hop_to_.clear();
  hop_to_.reserve(dim * 2 * n_);
  for (std::size_t c = 0; c < dim; ++c) {
    const std::uint64_t mask = basis_->config(c);
    const auto s = sites_of(mask);
    double e = 0;
    for (std::size_t a = 0; a < s.size(); ++a) {
      e += 2.0 * t_ + v_[s[a]];
      for (std::size_t b = a + 1; b < s.size(); ++b) e += pair_[s[b] - s[a]];
    }
    diag_[c] = e;
    for (int i : s) {
      for (int j : {i - 1, i + 1}) {
        if (j < 0 || j >= m || (mask >> j & 1)) continue;
        const std::uint64_t moved = (mask & ~(std::uint64_t{1} << i)) | (std::uint64_t{1} << j);
        hop_to_.push_back(static_cast<std::uint32_t>(basis_->rank(moved)));
      }
    }
    hop_start_[c + 1] = hop_to_.size();
  }
}

void DiscreteHamiltonian::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
  const auto dim = static_cast<std::ptrdiff_t>(diag_.size());
  y.resize(dim);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < dim; ++c) {
    double acc = diag_[c] * x[c];
    double hop = 0;
    for (std::size_t e = hop_start_[c]; e < hop_start_[c + 1]; ++e) hop += x[hop_to_[e]];
    y[c] = acc - t_ * hop;
  }
}

Eigen::MatrixXd DiscreteHamiltonian::one_body_matrix() const {
  Eigen::MatrixXd h = kinetic_matrix(grid_, hbar_, KineticStencil::ThreePoint);
  for (int k = 0; k < grid_.points(); ++k) h(k, k) += v_[k];
  return h;
}

FermionState::FermionState(std::shared_ptr<const OccupationBasis> b, SpatialGrid g,
                           Eigen::VectorXd c)
    : basis(std::move(b)), grid(g), coeffs(std::move(c)) {
  if (!basis) throw ValidationError("state needs a basis");
  if (static_cast<std::size_t>(coeffs.size()) != basis->size())
    throw ValidationError("state coefficients do not match the basis");
  if (std::abs(coeffs.norm() - 1.0) > 1e-10) throw ValidationError("state must have unit norm");
}

GroundState ground_state(const DiscreteHamiltonian& h, double tol) {
  LanczosOptions opts;
  opts.tol = tol;
  const EigenPair ep = lowest_eigenpair(
      [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { h.apply(x, y); },
      static_cast<Eigen::Index>(h.dimension()), opts);
  if (!(ep.residual <= tol)) {
    std::ostringstream os;
    os << "ground state did not converge: residual " << ep.residual << " > " << tol;
    throw NumericError(os.str());
  }
  Eigen::VectorXd v = ep.vector.normalized();
  Eigen::Index imax;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0) v = -v;
  return GroundState{ep.value, FermionState(h.basis(), h.grid(), std::move(v)), ep.residual,
                     ep.iterations, ep.method};
}

double expectation(const DiscreteHamiltonian& h, const FermionState& s) {
  Eigen::VectorXd y;
  h.apply(s.coeffs, y);
  return s.coeffs.dot(y) / s.coeffs.squaredNorm();
}

FermionState slater_state(std::shared_ptr<const OccupationBasis> basis, SpatialGrid grid,
                          const Eigen::MatrixXd& orbitals) {
  const int n = basis->particles();
  if (orbitals.cols() != n || orbitals.rows() != basis->sites())
    throw ValidationError("slater_state: orbital matrix must be sites x particles");
  Eigen::VectorXd c(static_cast<Eigen::Index>(basis->size()));
  Eigen::MatrixXd sub(n, n);
  for (std::size_t r = 0; r < basis->size(); ++r) {
    const auto s = sites_of(basis->config(r));
    for (int a = 0; a < n; ++a) sub.row(a) = orbitals.row(s[a]);
    c[static_cast<Eigen::Index>(r)] = n == 0 ? 1.0 : sub.determinant();
  }
  return FermionState(std::move(basis), grid, std::move(c));
}

Eigen::VectorXd one_body_spectrum(const DiscreteHamiltonian& h) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h.one_body_matrix(), Eigen::EigenvaluesOnly)
      .eigenvalues();
}

Eigen::MatrixXd one_body_orbitals(const DiscreteHamiltonian& h, int count) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.one_body_matrix());
  return es.eigenvectors().leftCols(count);
}

ReducedDensities reduced_densities(const FermionState& s, int k) {
  const int n = s.particles();
  if (k < 1 || k > 2) throw ValidationError("reduced densities are available for k = 1, 2");
  if (k > n) throw ValidationError("k exceeds the particle count");
  const OccupationBasis& b = *s.basis;
  const int m = b.sites();
  const double h = s.grid.spacing();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd r2;
  if (k == 2) r2 = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t c = 0; c < b.size(); ++c) {
    const double xc = s.coeffs[static_cast<Eigen::Index>(c)];
    if (xc == 0.0) continue;
    const std::uint64_t mask = b.config(c);
    const auto occ = sites_of(mask);
    for (int i : occ) g(i, i) += xc * xc;
    if (k == 2)
      for (int i : occ)
        for (int j : occ)
          if (i != j) r2(i, j) += 0.5 * xc * xc / (h * h);
    // <a_i^+ a_j>: move the particle at j to the empty site i
    for (int j : occ) {
      const std::uint64_t rest = mask & ~(std::uint64_t{1} << j);
      for (int i = 0; i < m; ++i) {
        if (i == j || (mask >> i & 1)) continue;
        const std::uint64_t moved = rest | (std::uint64_t{1} << i);
        const double sign = between(mask, i, j) % 2 ? -1.0 : 1.0;
        g(i, j) += sign * s.coeffs[static_cast<Eigen::Index>(b.rank(moved))] * xc;
      }
    }
  }
  std::vector<double> rho(m);
  for (int i = 0; i < m; ++i) rho[i] = std::max(0.0, g(i, i)) / h;
  OneBodyOperator gamma(s.grid, g.cast<cplx>());
  Eigen::VectorXd occ =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (g + g.transpose()), Eigen::EigenvaluesOnly)
          .eigenvalues()
          .reverse();
  return ReducedDensities{DensityField(s.grid, std::move(rho)), std::move(r2), std::move(gamma),
                          std::move(occ)};
}

Eigen::VectorXcd coherent_mode(const CoherentFamily& family, const SpatialGrid& grid,
                               const Point& x, const Point& p) {
  const auto f = coherent_state(x, p, family, grid);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(f.size()));
  const double sh = std::sqrt(grid.cell_volume());
  for (std::size_t k = 0; k < f.size(); ++k) v[static_cast<Eigen::Index>(k)] = sh * f[k];
  return v;
}

double husimi1(const FermionState& s, const CoherentFamily& family, const Point& x, const Point& p) {
  const OccupationBasis lower(s.basis->sites(), s.particles() - 1);
  const Eigen::VectorXcd psi = s.coeffs.cast<cplx>();
  return annihilate(*s.basis, psi, lower, coherent_mode(family, s.grid, x, p)).squaredNorm();
}

double husimi2(const FermionState& s, const CoherentFamily& family, const Point& x1,
               const Point& p1, const Point& x2, const Point& p2) {
  if (s.particles() < 2) throw ValidationError("k exceeds the particle count");
  const OccupationBasis l1(s.basis->sites(), s.particles() - 1);
  const OccupationBasis l2(s.basis->sites(), s.particles() - 2);
  const Eigen::VectorXcd psi = s.coeffs.cast<cplx>();
  const Eigen::VectorXcd a = annihilate(*s.basis, psi, l1, coherent_mode(family, s.grid, x1, p1));
  return annihilate(l1, a, l2, coherent_mode(family, s.grid, x2, p2)).squaredNorm();
}

double nbody_husimi(const FermionState& s, const std::vector<Eigen::VectorXcd>& modes) {
  const int n = s.particles();
  if (static_cast<int>(modes.size()) != n) throw ValidationError("one mode per particle expected");
  const OccupationBasis& b = *s.basis;
  Eigen::MatrixXcd sub(n, n);
  cplx amp = 0;
  for (std::size_t c = 0; c < b.size(); ++c) {
    const double xc = s.coeffs[static_cast<Eigen::Index>(c)];
    if (xc == 0.0) continue;
    const auto occ = sites_of(b.config(c));
    for (int a = 0; a < n; ++a)
      for (int t = 0; t < n; ++t) sub(a, t) = modes[t][occ[a]];
    amp += std::conj(sub.determinant()) * xc;
  }
  return std::norm(amp);
}

SlaterBound slater_upper_bound(const OneBodyOperator& gamma, const DiscreteHamiltonian& h,
                               double ground_energy, double tol) {
  if (!(gamma.grid() == h.grid())) throw ValidationError("gamma must live on the oracle grid");
  const int n = h.particles();
  const Eigen::MatrixXd re = gamma.matrix().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (re + re.transpose()));
  const Eigen::Index m = re.rows();
  SlaterBound out;
  out.gamma_trace = gamma.trace();
  out.occupations = es.eigenvalues().tail(n).reverse();
  if (out.occupations[n - 1] <= 1e-12)
    throw NumericError("rank of gamma^hbar is below N; no Slater trial available");
  const Eigen::MatrixXd orb = es.eigenvectors().rightCols(n).rowwise().reverse();
  (void)m;
  const FermionState trial = slater_state(h.basis(), h.grid(), orb);
  out.trial_energy = expectation(h, trial);
  out.ground_energy = ground_energy;
  out.pass = ground_energy <= out.trial_energy + tol;
  return out;
}

SlaterBound slater_upper_bound(const PhaseSpaceDensity& m, const CoherentFamily& family,
                               const DiscreteHamiltonian& h, double tol) {
  const OneBodyOperator gamma = gamma_from_measure(m, family, h.grid());
  const GroundState gs = ground_state(h);
  return slater_upper_bound(gamma, h, gs.energy, tol);
}

AprioriReport apriori_diagnostics(const FermionState& s, const DiscreteHamiltonian& h) {
  AprioriReport r;
  r.n = h.particles();
  const ReducedDensities rd = reduced_densities(s, r.n >= 2 ? 2 : 1);
  const Eigen::MatrixXd g = rd.gamma1.matrix().real();
  r.one_body = (h.one_body_matrix().cwiseProduct(g)).sum();
  const double hs = h.grid().spacing();
  if (r.n >= 2) {
    double acc = 0;
    for (Eigen::Index i = 0; i < rd.rho2.rows(); ++i)
      for (Eigen::Index j = 0; j < rd.rho2.cols(); ++j)
        if (i != j) acc += -h.pair_coupling()[std::abs(i - j)] * r.n * rd.rho2(i, j);
    r.interaction_integral = acc * hs * hs / r.n;
  }
  if (const auto& w = h.interaction()) {
    r.beta = w->profile().beta();
    r.w_norm = std::pow(
        radial_integral(Dimension(1), [&](double x) { return std::pow(w->radial(x), 1.5); },
                        w->support_radius(), 1e-10),
        1.0 / 1.5);
  }
  r.reference_one_body = std::pow(r.n, 1.0 + r.beta / 2.0);
  r.reference_interaction = std::pow(r.n, 1.0 + r.beta / 6.0);
  return r;
}

}  // namespace fermigas
