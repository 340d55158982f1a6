#include "fermigas/husimi.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include "fermigas/quadrature.hpp"

namespace fermigas {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// Unnormalised length-n DFT; sign = FFTW_FORWARD (e^{-i}) or FFTW_BACKWARD (e^{+i}).
class Dft {
 public:
  Dft(int n, int sign) : n_(n) {
    std::lock_guard<std::mutex> lock(plan_mutex());
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    plan_ = fftw_plan_dft_1d(n, in_, out_, sign, FFTW_ESTIMATE);
  }
  ~Dft() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan_);
    fftw_free(in_);
    fftw_free(out_);
  }
  Dft(const Dft&) = delete;
  Dft& operator=(const Dft&) = delete;

  void operator()(const std::vector<cplx>& in, std::vector<cplx>& out) {
    for (int k = 0; k < n_; ++k) {
      in_[k][0] = in[k].real();
      in_[k][1] = in[k].imag();
    }
    fftw_execute(plan_);
    out.resize(n_);
    for (int k = 0; k < n_; ++k) out[k] = {out_[k][0], out_[k][1]};
  }

 private:
  int n_;
  fftw_complex *in_, *out_;
  fftw_plan plan_;
};

int wrap(int k, int m) {
  k %= m;
  return k < 0 ? k + m : k;
}

void require_1d(const SpatialGrid& g, const char* what) {
  if (g.dim().value() != 1) throw ValidationError(std::string(what) + " is implemented for d = 1");
}

void require_resolved(const CoherentFamily& family, const SpatialGrid& grid) {
  const double width = 2.0 * family.width();
  if (width / grid.spacing() < 8.0) {
    std::ostringstream os;
    os << "grid under-resolves the coherent state: envelope width " << width << " spans "
       << width / grid.spacing() << " grid points (need >= 8)";
    throw ValidationError(os.str());
  }
  if (width >= 2.0 * grid.half_width()) throw ValidationError("coherent state is wider than the box");
}

// Envelope values by signed offset: offsets[t] in [-s, s], values normalised with h sum F^2 = 1.
struct Offsets {
  std::vector<int> n;
  std::vector<double> f;
};

Offsets envelope_offsets(const CoherentFamily& family, const SpatialGrid& grid) {
  require_1d(grid, "the phase-space lattice");
  require_resolved(family, grid);
  const double h = grid.spacing();
  const int s = static_cast<int>(std::ceil(family.width() / h));
  Offsets o;
  double norm2 = 0;
  for (int n = -s; n <= s; ++n) {
    const double v = family.scaled(std::abs(n) * h);
    if (v == 0.0) continue;
    o.n.push_back(n);
    o.f.push_back(v);
    norm2 += v * v * h;
  }
  const double c = 1.0 / std::sqrt(norm2);
  for (double& v : o.f) v *= c;
  return o;
}

std::vector<double> envelope_periodic(const Offsets& o, int m) {
  std::vector<double> f(m, 0.0);
  for (std::size_t t = 0; t < o.n.size(); ++t) f[wrap(o.n[t], m)] += o.f[t];
  return f;
}

}  // namespace

// ---------------------------------------------------------------------------

Envelope::Envelope(Dimension d, double sharpness) : d_(d), a_(sharpness) {
  if (!(sharpness > 0)) throw ValidationError("envelope sharpness must be positive");
  const double raw = radial_integral(d, [&](double r) { return std::pow((*this)(r), 2); }, 1.0);
  scale_ = 1.0 / std::sqrt(raw);
  l2_ = std::sqrt(radial_integral(d, [&](double r) { return std::pow((*this)(r), 2); }, 1.0));
  grad_sq_ = radial_integral(d, [&](double r) { return std::pow(derivative(r), 2); }, 1.0);
}

double Envelope::operator()(double r) const {
  if (r >= 1.0) return 0.0;
  const double u = 1.0 - r * r;
  return scale_ * std::exp(-a_ * r * r / u);
}

double Envelope::derivative(double r) const {
  if (r >= 1.0) return 0.0;
  const double u = 1.0 - r * r;
  return -(*this)(r) * 2.0 * a_ * r / (u * u);
}

CoherentFamily CoherentFamily::for_particles(double n, double beta, Envelope f) {
  if (!(n >= 1)) throw ValidationError("particle count must be >= 1");
  const double d = f.dim().value();
  CoherentFamily c{f};
  c.hbar = std::pow(n, -1.0 / d);
  c.hbar_x = std::pow(n, -beta - 1.0 / d);
  c.hbar_p = std::pow(n, beta - 1.0 / d);
  return c;
}

CoherentFamily CoherentFamily::with_hbar_x(double n, double hbar_x, Envelope f) {
  if (!(n >= 1)) throw ValidationError("particle count must be >= 1");
  if (!(hbar_x > 0)) throw ValidationError("hbar_x must be positive");
  CoherentFamily c{f};
  c.hbar = std::pow(n, -1.0 / f.dim().value());
  c.hbar_x = hbar_x;
  c.hbar_p = c.hbar * c.hbar / hbar_x;
  return c;
}

double CoherentFamily::scaled(double r) const {
  return std::pow(hbar_x, -0.25 * f.dim().value()) * f(r / std::sqrt(hbar_x));
}

std::vector<cplx> coherent_state(const Point& x, const Point& p, const CoherentFamily& family,
                                 const SpatialGrid& grid) {
  if (!(family.dim() == grid.dim())) throw ValidationError("coherent family and grid disagree on d");
  require_resolved(family, grid);
  const double period = 2.0 * grid.half_width();
  std::vector<cplx> out(grid.size());
  double norm2 = 0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const Point y = grid.point(k);
    const double dx0 = std::remainder(y[0] - x[0], period);
    const double dx1 = grid.dim().value() == 2 ? std::remainder(y[1] - x[1], period) : 0.0;
    const double env = family.scaled(std::hypot(dx0, dx1));
    if (env == 0.0) continue;
    const double phase = (p[0] * y[0] + p[1] * y[1]) / family.hbar;
    out[k] = env * cplx(std::cos(phase), std::sin(phase));
    norm2 += env * env;
  }
  norm2 *= grid.cell_volume();
  const double c = 1.0 / std::sqrt(norm2);
  for (auto& v : out) v *= c;
  return out;
}

PhaseLattice::PhaseLattice(SpatialGrid g, double hb) : grid(g), hbar(hb) {
  require_1d(g, "the phase-space lattice");
  if (!(hb > 0)) throw ValidationError("hbar must be positive");
}

double PhaseLattice::dp() const noexcept {
  return 2.0 * kPi * hbar / (grid.points() * grid.spacing());
}

// ---------------------------------------------------------------------------

OneBodyOperator::OneBodyOperator(SpatialGrid grid, Eigen::MatrixXcd site_matrix)
    : grid_(grid), mat_(std::move(site_matrix)) {
  require_1d(grid, "OneBodyOperator");
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (mat_.rows() != m || mat_.cols() != m) throw ValidationError("operator matrix has the wrong size");
}

OneBodyOperator OneBodyOperator::zero(SpatialGrid grid) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  return OneBodyOperator(grid, Eigen::MatrixXcd::Zero(m, m));
}

OneBodyOperator OneBodyOperator::from_orbitals(SpatialGrid grid, const Eigen::MatrixXcd& orbitals,
                                               const Eigen::VectorXd& occupations) {
  if (orbitals.cols() != occupations.size()) throw ValidationError("one occupation per orbital expected");
  const Eigen::MatrixXcd c = orbitals * std::sqrt(grid.spacing());
  return OneBodyOperator(grid, c * occupations.cast<cplx>().asDiagonal() * c.adjoint());
}

double OneBodyOperator::trace() const { return mat_.trace().real(); }

double OneBodyOperator::trace_of_square() const { return (mat_ * mat_).trace().real(); }

DensityField OneBodyOperator::density() const {
  std::vector<double> rho(grid_.size());
  for (std::size_t k = 0; k < rho.size(); ++k)
    rho[k] = std::max(0.0, mat_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real()) /
             grid_.spacing();
  return DensityField(grid_, std::move(rho));
}

Eigen::VectorXd OneBodyOperator::eigenvalues() const {
  const Eigen::MatrixXcd herm = 0.5 * (mat_ + mat_.adjoint());
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(herm, Eigen::EigenvaluesOnly).eigenvalues();
}

double OneBodyOperator::hermiticity_defect() const {
  return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
}

bool OneBodyOperator::is_density_matrix(double tol) const {
  if (hermiticity_defect() > tol) return false;
  const Eigen::VectorXd ev = eigenvalues();
  return ev.minCoeff() >= -tol && ev.maxCoeff() <= 1.0 + tol;
}

Eigen::MatrixXd kinetic_matrix(const SpatialGrid& grid, double hbar, KineticStencil stencil) {
  require_1d(grid, "kinetic_matrix");
  const int m = grid.points();
  const double h = grid.spacing();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  if (stencil == KineticStencil::ThreePoint) {
    const double c = hbar * hbar / (h * h);
    for (int k = 0; k < m; ++k) {
      t(k, k) = 2.0 * c;
      if (k + 1 < m) t(k, k + 1) = t(k + 1, k) = -c;
    }
    return t;
  }
  std::vector<double> row(m, 0.0);
  for (int delta = 0; delta < m; ++delta) {
    double s = 0;
    for (int q = -m / 2; q < m - m / 2; ++q) {
      const double kq = 2.0 * kPi * q / (m * h);
      s += kq * kq * std::cos(2.0 * kPi * q * delta / m);
    }
    row[delta] = hbar * hbar * s / m;
  }
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) t(k, l) = row[wrap(k - l, m)];
  return t;
}

OneBodyOperator free_fermion_gamma(const SpatialGrid& grid, const std::vector<double>& v,
                                   double hbar, int n, KineticStencil stencil) {
  require_1d(grid, "free_fermion_gamma");
  const int m = grid.points();
  if (n < 1 || n > m) throw ValidationError("need 1 <= N <= grid points");
  if (static_cast<int>(v.size()) != m) throw ValidationError("potential does not match the grid");
  Eigen::MatrixXd hmat = kinetic_matrix(grid, hbar, stencil);
  for (int k = 0; k < m; ++k) hmat(k, k) += v[k];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hmat);
  if (es.info() != Eigen::Success) throw NumericError("one-body diagonalisation failed");
  Eigen::MatrixXcd orb = es.eigenvectors().leftCols(n).cast<cplx>() / std::sqrt(grid.spacing());
  return OneBodyOperator::from_orbitals(grid, orb, Eigen::VectorXd::Ones(n));
}

// ---------------------------------------------------------------------------

HusimiTable husimi(const OneBodyOperator& gamma, const CoherentFamily& family) {
  const SpatialGrid& g = gamma.grid();
  const PhaseLattice lat(g, family.hbar);
  const Offsets o = envelope_offsets(family, g);
  const int m = g.points();
  const double sh = std::sqrt(g.spacing());
  const auto& mat = gamma.matrix();

  HusimiTable t;
  t.k = 1;
  t.x.resize(m);
  t.p.resize(m);
  for (int i = 0; i < m; ++i) {
    t.x[i] = g.coordinate(i);
    t.p[i] = lat.momentum(i);
  }
  t.values.resize(m, m);
  Dft dft(m, FFTW_BACKWARD);
  std::vector<cplx> diag(m), out;
  const std::size_t s = o.n.size();
  for (int i = 0; i < m; ++i) {
    std::fill(diag.begin(), diag.end(), cplx(0.0));
    for (std::size_t a = 0; a < s; ++a) {
      const int k = wrap(i + o.n[a], m);
      const double fa = sh * o.f[a];
      for (std::size_t b = 0; b < s; ++b) {
        const int l = wrap(i + o.n[b], m);
        diag[wrap(o.n[b] - o.n[a], m)] += fa * sh * o.f[b] * mat(k, l);
      }
    }
    dft(diag, out);
    for (int j = 0; j < m; ++j) t.values(i, j) = out[wrap(lat.q(j), m)].real();
  }
  return t;
}

std::vector<double> husimi2_slater(const OneBodyOperator& gamma, const CoherentFamily& family,
                                   const std::vector<std::pair<Point, Point>>& z1,
                                   const std::vector<std::pair<Point, Point>>& z2) {
  if (z1.size() != z2.size()) throw ValidationError("two-body Husimi needs paired sample points");
  const SpatialGrid& g = gamma.grid();
  const double sh = std::sqrt(g.spacing());
  std::vector<double> out(z1.size());
  for (std::size_t s = 0; s < z1.size(); ++s) {
    const auto a = coherent_state(z1[s].first, z1[s].second, family, g);
    const auto b = coherent_state(z2[s].first, z2[s].second, family, g);
    Eigen::VectorXcd ca(a.size()), cb(b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      ca[k] = sh * a[k];
      cb[k] = sh * b[k];
    }
    const double ma = ca.dot(gamma.matrix() * ca).real();
    const double mb = cb.dot(gamma.matrix() * cb).real();
    const cplx x = ca.dot(gamma.matrix() * cb);
    out[s] = ma * mb - std::norm(x);
  }
  return out;
}

std::vector<double> momentum_density(const OneBodyOperator& gamma, double hbar) {
  const SpatialGrid& g = gamma.grid();
  const PhaseLattice lat(g, hbar);
  const int m = g.points();
  std::vector<cplx> sdiag(m, cplx(0.0)), out;
  const auto& mat = gamma.matrix();
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) sdiag[wrap(k - l, m)] += mat(k, l);
  Dft dft(m, FFTW_FORWARD);
  dft(sdiag, out);
  std::vector<double> t(m);
  const double c = g.spacing() / (2.0 * kPi * hbar);
  for (int j = 0; j < m; ++j) t[j] = c * out[wrap(lat.q(j), m)].real();
  return t;
}

std::vector<double> momentum_envelope(const CoherentFamily& family, const SpatialGrid& grid) {
  const PhaseLattice lat(grid, family.hbar);
  const int m = grid.points();
  const auto f = envelope_periodic(envelope_offsets(family, grid), m);
  std::vector<cplx> in(f.begin(), f.end()), out;
  Dft dft(m, FFTW_FORWARD);
  dft(in, out);
  const double h = grid.spacing();
  std::vector<double> g(m);
  for (int j = 0; j < m; ++j) g[j] = h * h * std::norm(out[wrap(lat.q(j), m)]) / (2.0 * kPi * family.hbar);
  return g;
}

std::vector<double> position_envelope(const CoherentFamily& family, const SpatialGrid& grid) {
  auto f = envelope_periodic(envelope_offsets(family, grid), grid.points());
  for (double& v : f) v *= v;
  return f;
}

ResolutionCheck resolution_of_identity(const CoherentFamily& family, const SpatialGrid& grid,
                                       int vectors, unsigned long long seed) {
  const PhaseLattice lat(grid, family.hbar);
  const Offsets o = envelope_offsets(family, grid);
  const int m = grid.points();
  const double h = grid.spacing(), sh = std::sqrt(h), dp = lat.dp();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Dft fwd(m, FFTW_FORWARD), bwd(m, FFTW_BACKWARD);
  ResolutionCheck rc;
  rc.vectors = vectors;
  std::vector<cplx> psi(m), acc(m), buf(m), coef, back;
  for (int v = 0; v < vectors; ++v) {
    for (auto& z : psi) z = {gauss(rng), gauss(rng)};
    std::fill(acc.begin(), acc.end(), cplx(0.0));
    for (int i = 0; i < m; ++i) {
      std::fill(buf.begin(), buf.end(), cplx(0.0));
      for (std::size_t a = 0; a < o.n.size(); ++a) {
        const int k = wrap(i + o.n[a], m);
        buf[k] = sh * o.f[a] * psi[k];
      }
      fwd(buf, coef);  // <f_{x_i, p_q}, psi> for every q
      bwd(coef, back);
      for (std::size_t a = 0; a < o.n.size(); ++a) {
        const int k = wrap(i + o.n[a], m);
        acc[k] += h * dp * sh * o.f[a] * back[k];
      }
    }
    double num = 0, den = 0;
    const double c = 2.0 * kPi * family.hbar;
    for (int k = 0; k < m; ++k) {
      num += std::norm(acc[k] - c * psi[k]);
      den += std::norm(c * psi[k]);
    }
    rc.max_relative_error = std::max(rc.max_relative_error, std::sqrt(num / den));
  }
  return rc;
}

MarginalCheck marginal_identities(const OneBodyOperator& gamma, const CoherentFamily& family) {
  const SpatialGrid& g = gamma.grid();
  const PhaseLattice lat(g, family.hbar);
  const HusimiTable t = husimi(gamma, family);
  const int m = g.points();
  const double h = g.spacing(), dp = lat.dp(), n = family.particles();
  const auto f2 = position_envelope(family, g);
  const auto g2 = momentum_envelope(family, g);
  const auto tg = momentum_density(gamma, family.hbar);
  const auto& mat = gamma.matrix();

  MarginalCheck mc;
  mc.trace_identity = t.values.sum() * h * dp / (2.0 * kPi);
  for (int i = 0; i < m; ++i) {
    const double lhs = n * dp * t.values.row(i).sum() / (2.0 * kPi);
    double rhs = 0;
    for (int k = 0; k < m; ++k) rhs += mat(k, k).real() * f2[wrap(k - i, m)];
    mc.position_l1 += h * std::abs(lhs - rhs);
    mc.position_mass += h * lhs;
  }
  for (int j = 0; j < m; ++j) {
    const double lhs = n * h * t.values.col(j).sum() / (2.0 * kPi);
    double rhs = 0;
    for (int jj = 0; jj < m; ++jj) rhs += dp * tg[jj] * g2[wrap(j - jj + m / 2, m)];  // g2 is centred at m/2
    mc.momentum_l1 += dp * std::abs(lhs - rhs);
    mc.momentum_mass += dp * lhs;
  }
  return mc;
}

// ---------------------------------------------------------------------------

namespace {

// Average of m over the momentum cell [p - dp/2, p + dp/2] for every lattice momentum.
std::vector<double> cell_averaged_row(const PhaseSpaceDensity& m, std::size_t ix,
                                      const PhaseLattice& lat) {
  const int n = lat.size();
  const double dp = lat.dp();
  std::vector<double> out(n, 0.0);
  if (m.is_indicator()) {
    const double r = m.radii()[ix];
    if (r <= 0) return out;
    for (int j = 0; j < n; ++j) {
      const double a = lat.momentum(j) - 0.5 * dp, b = a + dp;
      out[j] = std::max(0.0, std::min(b, r) - std::max(a, -r)) / dp;
    }
    return out;
  }
  const MomentumGrid& pg = m.momentum_grid();
  const double dq = pg.spacing();
  for (int s = 0; s < pg.points(); ++s) {
    const double val = m.value(ix, s);
    if (val == 0) continue;
    const double a0 = pg.coordinate(s) - 0.5 * dq, b0 = a0 + dq;
    const int j0 = std::max(0, static_cast<int>(std::floor((a0 - lat.momentum(0)) / dp + 0.5)) - 1);
    for (int j = j0; j < n; ++j) {
      const double a = lat.momentum(j) - 0.5 * dp, b = a + dp;
      if (a >= b0) break;
      out[j] += val * std::max(0.0, std::min(b, b0) - std::max(a, a0)) / dp;
    }
  }
  return out;
}

}  // namespace

OneBodyOperator gamma_from_measure(const PhaseSpaceDensity& m, const CoherentFamily& family,
                                   const SpatialGrid& grid) {
  require_1d(grid, "gamma_from_measure");
  if (!(m.spatial_grid() == grid))
    throw ValidationError("gamma_from_measure: m must live on the operator grid");
  if (!m.pauli_bound_ok(1e-12)) throw ValidationError("gamma_from_measure needs 0 <= m <= 1");
  const PhaseLattice lat(grid, family.hbar);
  const int mm = grid.points();
  const double h = grid.spacing(), dp = lat.dp();
  const double pmax = lat.momentum(0) - 0.5 * dp;  // = -(M/2 + 1/2) dp

  if (m.is_indicator()) {
    const double rmax = *std::max_element(m.radii().begin(), m.radii().end());
    if (rmax > std::abs(pmax))
      throw ValidationError("momentum support of m exceeds the phase lattice (refine the grid)");
  }
  const Offsets o = envelope_offsets(family, grid);
  const DensityField rho = m.spatial_density();
  const int margin = *std::max_element(o.n.begin(), o.n.end()) + 1;
  for (int i = 0; i < mm; ++i)
    if ((i < margin || i >= mm - margin) && rho[i] > 0)
      throw ValidationError("gamma_from_measure: rho_m must vanish within one envelope width of the box edge");

  std::vector<std::vector<double>> rows(mm);
  double norm = 0;
  for (int i = 0; i < mm; ++i) {
    rows[i] = cell_averaged_row(m, i, lat);
    for (double v : rows[i]) norm += v;
  }
  norm *= h * dp / (2.0 * kPi);
  if (norm == 0.0) return OneBodyOperator::zero(grid);
  if (std::abs(norm - 1.0) > 1e-2) {
    std::ostringstream os;
    os << "gamma_from_measure needs (2pi)^{-d} \\iint m = 1, got " << norm;
    throw ValidationError(os.str());
  }

  Eigen::MatrixXcd gam = Eigen::MatrixXcd::Zero(mm, mm);
  const double c0 = h * h * dp / (2.0 * kPi * family.hbar);
  Dft dft(mm, FFTW_BACKWARD);
  std::vector<cplx> in(mm), kern;
  const std::size_t s = o.n.size();
  for (int i = 0; i < mm; ++i) {
    bool any = false;
    for (int j = 0; j < mm; ++j) {
      in[wrap(lat.q(j), mm)] = rows[i][j];
      any = any || rows[i][j] != 0.0;
    }
    if (!any) continue;
    dft(in, kern);
    for (std::size_t a = 0; a < s; ++a) {
      const int k = wrap(i + o.n[a], mm);
      for (std::size_t b = 0; b < s; ++b) {
        const int l = wrap(i + o.n[b], mm);
        gam(k, l) += c0 * o.f[a] * o.f[b] * kern[wrap(o.n[a] - o.n[b], mm)];
      }
    }
  }
  return OneBodyOperator(grid, std::move(gam));
}

HartreeBreakdown hartree_energy(const OneBodyOperator& gamma, const std::vector<double>& v,
                                const ScaledInteraction& w_n, double n, double hbar,
                                KineticStencil stencil) {
  const SpatialGrid& g = gamma.grid();
  if (v.size() != g.size()) throw ValidationError("grid mismatch: V has the wrong size");
  const Eigen::MatrixXd t = kinetic_matrix(g, hbar, stencil);
  const auto& mat = gamma.matrix();
  HartreeBreakdown e;
  e.kinetic = (t.cast<cplx>().cwiseProduct(mat.transpose())).sum().real();
  for (std::size_t k = 0; k < v.size(); ++k)
    e.potential += v[k] * mat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
  e.interaction = -pair_integral(gamma.density(), w_n) / n;
  e.total = e.kinetic + e.potential + e.interaction;
  return e;
}

SmearingDefect smearing_defect(const ScaledInteraction& v, const CoherentFamily& family,
                               int points_per_width) {
  if (family.dim().value() != 1 || v.profile().dim().value() != 1)
    throw ValidationError("smearing_defect is implemented for d = 1");
  if (points_per_width < 8) throw ValidationError("points_per_width must be >= 8");
  const double sigma = family.width();
  const double delta = sigma / points_per_width;
  const int s = points_per_width;
  std::vector<double> k(2 * s + 1);
  double norm = 0;
  for (int t = -s; t <= s; ++t) {
    const double f = family.scaled(std::abs(t) * delta);
    k[t + s] = f * f;
    norm += f * f * delta;
  }
  for (double& x : k) x /= norm;
  std::vector<double> k2(4 * s + 1, 0.0);
  for (int a = 0; a <= 2 * s; ++a)
    for (int b = 0; b <= 2 * s; ++b) k2[a + b] += k[a] * k[b] * delta;

  const double reach = v.support_radius() + 2.0 * sigma + 2.0 * delta;
  const long n = static_cast<long>(std::ceil(2.0 * reach / delta));
  if (static_cast<double>(n) * static_cast<double>(k2.size()) > 5e9)
    throw CapError("smearing_defect: fine grid too large");
  std::vector<double> vs(n);
  for (long t = 0; t < n; ++t) vs[t] = v.radial(std::abs(-reach + (t + 0.5) * delta));
  const int half = 2 * s;
  double l1 = 0;
#pragma omp parallel for reduction(+ : l1) schedule(static)
  for (long t = 0; t < n; ++t) {
    double acc = 0;
    for (int u = -half; u <= half; ++u) {
      const long src = t - u;
      if (src >= 0 && src < n) acc += k2[u + half] * vs[src];
    }
    l1 += std::abs(vs[t] - acc * delta);
  }
  SmearingDefect sd;
  sd.hbar_x = family.hbar_x;
  sd.l1_defect = l1 * delta;
  sd.gradient_l1 = v.gradient_l1();
  sd.ratio = sd.l1_defect / (std::sqrt(family.hbar_x) * sd.gradient_l1);
  return sd;
}

SemiclassicalReport semiclassical_error_decomposition(const OneBodyOperator& gamma,
                                                      const CoherentFamily& family,
                                                      const std::vector<double>& v,
                                                      const ScaledInteraction& w_n) {
  const SpatialGrid& g = gamma.grid();
  if (v.size() != g.size()) throw ValidationError("grid mismatch: V has the wrong size");
  const PhaseLattice lat(g, family.hbar);
  const HusimiTable t = husimi(gamma, family);
  const int m = g.points();
  const double h = g.spacing(), dp = lat.dp(), n = family.particles();
  const auto& mat = gamma.matrix();

  SemiclassicalReport r;
  r.n = n;
  r.hbar = family.hbar;
  r.hbar_x = family.hbar_x;
  r.hbar_p = family.hbar_p;
  r.trace = gamma.trace();
  r.pauli_max = t.max();

  double kin = 0, pot = 0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      kin += t.p[j] * t.p[j] * t.values(i, j);
      pot += v[i] * t.values(i, j);
    }
  r.kinetic_phase_space = kin * h * dp / (2.0 * kPi);
  const Eigen::MatrixXd tk = kinetic_matrix(g, family.hbar, KineticStencil::Spectral);
  r.kinetic_operator = (tk.cast<cplx>().cwiseProduct(mat.transpose())).sum().real() / n;
  r.kinetic_correction = r.kinetic_phase_space - r.kinetic_operator;
  r.kinetic_correction_exact = r.trace / n * family.hbar_p * family.f.gradient_norm_sq();

  double vtr = 0;
  for (int k = 0; k < m; ++k) vtr += v[k] * mat(k, k).real();
  r.potential_smearing = pot * h * dp / (2.0 * kPi) - vtr / n;
  r.potential_fitted_c = r.potential_smearing / family.hbar_x;

  const SmearingDefect sd = smearing_defect(w_n, family);
  r.interaction_smearing = sd.l1_defect;
  r.interaction_bound_shape = std::sqrt(family.hbar_x) * sd.gradient_l1;
  r.interaction_fitted_c = sd.ratio;
  return r;
}

}  // namespace fermigas
