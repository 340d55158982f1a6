#include "fermigas/tf_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace fermigas {

namespace {

void require_matching(const DensityField& rho, const std::vector<double>& v) {
  if (v.size() != rho.grid().size())
    throw ValidationError("grid mismatch: V was sampled on a different grid than rho");
}

bool occupied_interior(const DensityField& rho, std::size_t k) {
  const SpatialGrid& g = rho.grid();
  const int m = g.points();
  const auto& r = rho.values();
  if (g.dim().value() == 1) {
    const int i = static_cast<int>(k);
    return i > 0 && i + 1 < m && r[k - 1] > 0 && r[k + 1] > 0;
  }
  const int i = static_cast<int>(k) / m, j = static_cast<int>(k) % m;
  if (i == 0 || j == 0 || i + 1 == m || j + 1 == m) return false;
  return r[g.flat(i - 1, j)] > 0 && r[g.flat(i + 1, j)] > 0 && r[g.flat(i, j - 1)] > 0 &&
         r[g.flat(i, j + 1)] > 0;
}

bool touches_edge(const DensityField& rho) {
  const SpatialGrid& g = rho.grid();
  const int m = g.points();
  const auto& r = rho.values();
  if (g.dim().value() == 1) return r.front() > 0 || r.back() > 0;
  for (int t = 0; t < m; ++t)
    if (r[g.flat(0, t)] > 0 || r[g.flat(m - 1, t)] > 0 || r[g.flat(t, 0)] > 0 ||
        r[g.flat(t, m - 1)] > 0)
      return true;
  return false;
}

// Local EL quantity whose value should equal lambda on the support.
double el_lhs(int d, double rho, double v, double c_tf, double i_w, const RelaxedLocalEnergy* rel) {
  if (d == 2) return 2.0 * (c_tf - i_w) * rho + v;
  const double drv = rho >= rel->rho_alpha() ? rel->de(rho) : 0.0;
  return drv + v - rel->alpha();
}

double complement_shift(int d, const RelaxedLocalEnergy* rel) {
  return d == 2 ? 0.0 : rel->alpha();
}

template <class Build>
TFSolution bisect_mass(Build build, double lambda_floor, const SolverOptions& opts) {
  double lo = lambda_floor;
  DensityField rlo = build(lo);
  if (rlo.mass() >= 1.0) throw NumericError("bracket failure: mass already exceeds 1 at the floor");
  double step = 1.0;
  double hi = lo + step;
  DensityField rhi = build(hi);
  int it = 0;
  while (rhi.mass() < 1.0) {
    if (++it > 200 || !std::isfinite(hi))
      throw NumericError("bracket failure: mass stays below 1 (is V bounded on the box?)");
    lo = hi;
    rlo = rhi;
    step *= 2.0;
    hi = lo + step;
    rhi = build(hi);
  }
  bool collapsed = false;
  for (; it < opts.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) {
      collapsed = true;
      break;
    }
    DensityField r = build(mid);
    if (r.mass() < 1.0) {
      lo = mid;
      rlo = std::move(r);
    } else {
      hi = mid;
      rhi = std::move(r);
    }
  }
  const double glo = std::abs(rlo.mass() - 1.0), ghi = std::abs(rhi.mass() - 1.0);
  const bool take_hi = ghi <= glo;
  const double gap = take_hi ? ghi : glo;
  if (gap > opts.mass_tol) {
    if (collapsed) throw MassJumpError(gap, lo, hi);
    std::ostringstream os;
    os << "chemical potential bisection did not converge in " << opts.max_iterations
       << " iterations (mass gap " << gap << ")";
    throw NumericError(os.str());
  }
  TFSolution s(take_hi ? std::move(rhi) : std::move(rlo));
  s.lambda = take_hi ? hi : lo;
  s.mass_gap = gap;
  s.iterations = it;
  return s;
}

void finish(TFSolution& s, const std::vector<double>& v, const RelaxedLocalEnergy* rel) {
  s.energy = tf_energy(s.rho, v, s.c_tf, s.i_w);
  const int d = s.rho.grid().dim().value();
  const ELResidual el =
      d == 1 ? el_residual(s, v, *rel) : el_residual(s.rho, s.lambda, v, s.c_tf, s.i_w);
  s.el_residual = el.support_defect;
  s.complement_min = el.complement_min;
  s.jump_min = density_jump_min(s.rho);
  s.touches_boundary = touches_edge(s.rho);
}

}  // namespace

EnergyBreakdown tf_energy(const DensityField& rho, const std::vector<double>& v, double c_tf,
                          double i_w) {
  require_matching(rho, v);
  const double q = 1.0 + 2.0 / rho.grid().dim().value();
  EnergyBreakdown e;
  double kin = 0, pot = 0, sq = 0;
  const auto& r = rho.values();
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k] == 0.0) continue;
    kin += std::pow(r[k], q);
    pot += v[k] * r[k];
    sq += r[k] * r[k];
  }
  const double h = rho.grid().cell_volume();
  e.kinetic = c_tf * kin * h;
  e.potential = pot * h;
  e.interaction = -i_w * sq * h;
  e.total = e.kinetic + e.potential + e.interaction;
  return e;
}

EnergyBreakdown tf_energy(const DensityField& rho, const TrapPotential& v,
                          const TFConstants& constants, double i_w) {
  if (!(v.dim() == rho.grid().dim()) || !(constants.d == rho.grid().dim()))
    throw ValidationError("grid mismatch: rho, V and constants disagree on the dimension");
  return tf_energy(rho, sample(v, rho.grid()), constants.c_tf, i_w);
}

// ---------------------------------------------------------------------------

RelaxedLocalEnergy::RelaxedLocalEnergy(double c_tf, double i_w, double eta)
    : c_(c_tf), i_(i_w), eta_(eta) {
  if (!(c_tf > 0)) throw ValidationError("c_TF must be positive");
  if (!(i_w >= 0)) throw ValidationError("I_w must be nonnegative");
  if (!(eta >= 0 && eta < 1)) throw ValidationError("eta must lie in [0, 1)");
  alpha_ = i_ * i_ / (4.0 * c_);
  rho_alpha_ = i_ / (2.0 * c_);
}

RelaxedLocalEnergy RelaxedLocalEnergy::eta_variant() const {
  return RelaxedLocalEnergy((1.0 - eta_) * c_, i_, eta_);
}

std::optional<double> RelaxedLocalEnergy::larger_root(double lambda_minus_v) const noexcept {
  const double disc = i_ * i_ + 3.0 * c_ * lambda_minus_v;
  if (disc < 0) return std::nullopt;
  return (i_ + std::sqrt(disc)) / (3.0 * c_);
}

double RelaxedLocalEnergy::select(double v, double lambda) const noexcept {
  const double u = v - alpha_ - lambda;
  if (!(u < 0)) return 0.0;
  const auto t = larger_root(lambda - v);
  if (!t) return 0.0;
  const double tt = std::max(*t, rho_alpha_);
  return j(tt) + u * tt < 0.0 ? tt : 0.0;
}

// ---------------------------------------------------------------------------

ELResidual el_residual(const DensityField& rho, double lambda, const std::vector<double>& v,
                       double c_tf, double i_w) {
  require_matching(rho, v);
  const int d = rho.grid().dim().value();
  std::optional<RelaxedLocalEnergy> rel;
  if (d == 1) rel.emplace(c_tf, i_w);
  const RelaxedLocalEnergy* rp = rel ? &*rel : nullptr;
  ELResidual out;
  const double shift = complement_shift(d, rp);
  const auto& r = rho.values();
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k] > 0) {
      ++out.support_size;
      out.support_defect =
          std::max(out.support_defect, std::abs(el_lhs(d, r[k], v[k], c_tf, i_w, rp) - lambda));
    } else {
      out.complement_min = std::min(out.complement_min, v[k] - shift - lambda);
    }
  }
  return out;
}

ELResidual el_residual(const TFSolution& sol, const std::vector<double>& v,
                       const RelaxedLocalEnergy& rel) {
  if (sol.rho.grid().dim().value() != 1)
    return el_residual(sol.rho, sol.lambda, v, sol.c_tf, sol.i_w);
  return el_residual(sol.rho, sol.lambda, v, rel.c_tf(), rel.i_w());
}

ELResidual el_residual_best_lambda(const DensityField& rho, const std::vector<double>& v,
                                   double c_tf, double i_w) {
  require_matching(rho, v);
  const int d = rho.grid().dim().value();
  std::optional<RelaxedLocalEnergy> rel;
  if (d == 1) rel.emplace(c_tf, i_w);
  const RelaxedLocalEnergy* rp = rel ? &*rel : nullptr;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (rho[k] <= 0) continue;
    const double q = el_lhs(d, rho[k], v[k], c_tf, i_w, rp);
    lo = std::min(lo, q);
    hi = std::max(hi, q);
  }
  const double lambda = std::isfinite(lo) ? 0.5 * (lo + hi) : 0.0;
  return el_residual(rho, lambda, v, c_tf, i_w);
}

double density_jump_min(const DensityField& rho) {
  double out = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < rho.values().size(); ++k) {
    if (rho[k] > 0 && occupied_interior(rho, k))
      out = std::isnan(out) ? rho[k] : std::min(out, rho[k]);
  }
  return out;
}

DensityField density_at_lambda_2d(const std::vector<double>& v, const SpatialGrid& grid,
                                  double kappa, double lambda) {
  std::vector<double> r(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) r[k] = std::max(lambda - v[k], 0.0) / (2.0 * kappa);
  return DensityField(grid, std::move(r));
}

DensityField density_at_lambda_1d(const std::vector<double>& v, const SpatialGrid& grid,
                                  const RelaxedLocalEnergy& rel, double lambda) {
  std::vector<double> r(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) r[k] = rel.select(v[k], lambda);
  return DensityField(grid, std::move(r));
}

TFSolution minimize_2d(const std::vector<double>& v, const SpatialGrid& grid, double c_tf,
                       double i_w, SolverOptions opts) {
  if (grid.dim().value() != 2) throw ValidationError("minimize_2d needs a 2D grid");
  if (v.size() != grid.size()) throw ValidationError("grid mismatch: V has the wrong size");
  const double kappa = c_tf - i_w;
  if (!(kappa > 0)) throw ValidationError("minimize_2d requires I_w < c_TF");
  const double vmin = *std::min_element(v.begin(), v.end());
  TFSolution s = bisect_mass(
      [&](double lam) { return density_at_lambda_2d(v, grid, kappa, lam); }, vmin, opts);
  s.c_tf = c_tf;
  s.i_w = i_w;
  finish(s, v, nullptr);
  return s;
}

TFSolution minimize_2d(const TrapPotential& v, const TFConstants& constants, double i_w,
                       const SpatialGrid& grid, SolverOptions opts) {
  if (v.dim().value() != 2 || constants.d.value() != 2)
    throw ValidationError("minimize_2d is the d = 2 solver");
  if (!(i_w < constants.c_tf)) throw ValidationError("minimize_2d requires I_w < c_TF");
  return minimize_2d(sample(v, grid), grid, constants.c_tf, i_w, opts);
}

TFSolution minimize_1d_relaxed(const std::vector<double>& v, const SpatialGrid& grid,
                               const RelaxedLocalEnergy& rel, SolverOptions opts) {
  if (grid.dim().value() != 1) throw ValidationError("minimize_1d_relaxed needs a 1D grid");
  if (v.size() != grid.size()) throw ValidationError("grid mismatch: V has the wrong size");
  const double vmin = *std::min_element(v.begin(), v.end());
  TFSolution s = bisect_mass(
      [&](double lam) { return density_at_lambda_1d(v, grid, rel, lam); },
      vmin - rel.alpha() - 1.0, opts);
  s.c_tf = rel.c_tf();
  s.i_w = rel.i_w();
  finish(s, v, &rel);
  return s;
}

TFSolution minimize_1d_relaxed(const TrapPotential& v, const RelaxedLocalEnergy& rel,
                               const SpatialGrid& grid, SolverOptions opts) {
  if (v.dim().value() != 1) throw ValidationError("minimize_1d_relaxed is the d = 1 solver");
  if (!v.level_sets_null())
    throw ValidationError("minimize_1d_relaxed needs V with null level sets");
  return minimize_1d_relaxed(sample(v, grid), grid, rel, opts);
}

double relaxed_energy(const DensityField& rho, const std::vector<double>& v,
                      const RelaxedLocalEnergy& rel) {
  require_matching(rho, v);
  double acc = 0;
  for (std::size_t k = 0; k < v.size(); ++k) acc += rel.j(rho[k]) + (v[k] - rel.alpha()) * rho[k];
  return acc * rho.grid().cell_volume();
}

RelaxationReport relaxation_equivalence_check(const std::vector<double>& v,
                                              const SpatialGrid& grid,
                                              const RelaxedLocalEnergy& rel, double tol,
                                              SolverOptions opts) {
  const TFSolution s = minimize_1d_relaxed(v, grid, rel, opts);
  RelaxationReport r;
  r.e_tf_j = relaxed_energy(s.rho, v, rel);
  r.e_tf = tf_energy(s.rho, v, rel.c_tf(), rel.i_w()).total;
  r.difference = std::abs(r.e_tf - r.e_tf_j);
  r.jump_min = s.jump_min;
  r.jump_ok = std::isnan(s.jump_min) || s.jump_min >= rel.rho_alpha() - tol;
  r.pass = r.difference <= tol && r.jump_ok;
  return r;
}

RelaxationReport relaxation_equivalence_check(const TrapPotential& v, const RelaxedLocalEnergy& rel,
                                              const SpatialGrid& grid, double tol,
                                              SolverOptions opts) {
  if (v.dim().value() != 1) throw ValidationError("relaxation check is defined for d = 1");
  return relaxation_equivalence_check(sample(v, grid), grid, rel, tol, opts);
}

}  // namespace fermigas
