#include "fermigas/tiling.hpp"

#include <algorithm>
#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include "fermigas/quadrature.hpp"

namespace fermigas {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int axis_index(double v, double half, int cells, double side) {
  if (!(v >= -half && v <= half)) return -1;
  int k = static_cast<int>(std::floor((v + half) / side));
  return std::clamp(k, 0, cells - 1);
}

constexpr int kBlock = 256;

}  // namespace

double phase_distance(const PhasePoint& a, const PhasePoint& b) {
  double s = 0;
  for (int i = 0; i < 2; ++i) {
    s += (a.x[i] - b.x[i]) * (a.x[i] - b.x[i]);
    s += (a.p[i] - b.p[i]) * (a.p[i] - b.p[i]);
  }
  return std::sqrt(s);
}

Tiling::Tiling(Dimension d, double half_width, int cells_x, int cells_p)
    : d_(d), half_(half_width), nx_(cells_x), np_(cells_p) {
  if (!(half_width > 0) || !std::isfinite(half_width))
    throw ValidationError("tiling half width must be positive");
  if (cells_x < 1 || cells_p < 1) throw ValidationError("tiling needs at least one cell per axis");
  lx_ = 2 * half_ / nx_;
  lp_ = 2 * half_ / np_;
  if (!(lx_ > 0) || !(lp_ > 0)) throw ValidationError("zero-width tiling cells");
}

Tiling Tiling::paper_scaling(Dimension d, double particles, int n) {
  if (!(particles >= 1)) throw ValidationError("paper-scaling preset needs N >= 1");
  if (n < 1) throw ValidationError("paper-scaling preset needs n >= 1");
  double dd = d.value();
  double gamma = 4.0 / (4 * dd + 1);
  double lx = std::pow(particles, -2.0 / (dd * (2 * dd + 1)));
  double lp = std::pow(particles, -2.0 / (dd * (2 * dd + 1) * (4 * dd + 1)));
  double half = n * std::pow(particles, -gamma / (2 * dd));
  int cx = std::max(1, static_cast<int>(std::lround(2 * half / lx)));
  int cp = std::max(1, static_cast<int>(std::lround(2 * half / lp)));
  return Tiling(d, half, cx, cp);
}

std::size_t Tiling::cell_count() const noexcept {
  std::size_t a = static_cast<std::size_t>(nx_) * np_;
  return d_.value() == 1 ? a : a * a;
}

double Tiling::cell_volume() const noexcept { return std::pow(lx_ * lp_, d_.value()); }

double Tiling::cell_diameter() const noexcept {
  return std::sqrt(d_.value() * (lx_ * lx_ + lp_ * lp_));
}

double Tiling::volume() const noexcept { return std::pow(2 * half_, 2 * d_.value()); }

bool Tiling::contains(const PhasePoint& z) const noexcept { return cell_of(z) >= 0; }

long Tiling::cell_of(const PhasePoint& z) const noexcept {
  if (d_.value() == 1) {
    int i = axis_index(z.x[0], half_, nx_, lx_);
    int j = axis_index(z.p[0], half_, np_, lp_);
    if (i < 0 || j < 0) return -1;
    return static_cast<long>(i) * np_ + j;
  }
  int i1 = axis_index(z.x[0], half_, nx_, lx_);
  int i2 = axis_index(z.x[1], half_, nx_, lx_);
  int j1 = axis_index(z.p[0], half_, np_, lp_);
  int j2 = axis_index(z.p[1], half_, np_, lp_);
  if (i1 < 0 || i2 < 0 || j1 < 0 || j2 < 0) return -1;
  return ((static_cast<long>(i1) * nx_ + i2) * np_ + j1) * np_ + j2;
}

std::vector<double> Tiling::cell_lower(std::size_t j) const {
  if (j >= cell_count()) throw ValidationError("cell index out of range");
  if (d_.value() == 1) {
    long i = static_cast<long>(j) / np_, q = static_cast<long>(j) % np_;
    return {-half_ + i * lx_, -half_ + q * lp_};
  }
  long r = static_cast<long>(j);
  long j2 = r % np_;
  r /= np_;
  long j1 = r % np_;
  r /= np_;
  long i2 = r % nx_;
  long i1 = r / nx_;
  return {-half_ + i1 * lx_, -half_ + i2 * lx_, -half_ + j1 * lp_, -half_ + j2 * lp_};
}

std::vector<double> Tiling::cell_sides() const {
  if (d_.value() == 1) return {lx_, lp_};
  return {lx_, lx_, lp_, lp_};
}

PhasePoint Tiling::cell_center(std::size_t j) const {
  auto lo = cell_lower(j);
  PhasePoint z;
  if (d_.value() == 1) {
    z.x[0] = lo[0] + lx_ / 2;
    z.p[0] = lo[1] + lp_ / 2;
  } else {
    z.x = {lo[0] + lx_ / 2, lo[1] + lx_ / 2};
    z.p = {lo[2] + lp_ / 2, lo[3] + lp_ / 2};
  }
  return z;
}

double DiscreteMeasure::mass() const {
  double s = 0;
  for (double w : weights) s += w;
  return s;
}

DiscreteMeasure DiscreteMeasure::restricted(const Tiling& t) const {
  DiscreteMeasure out{d, {}, {}};
  for (std::size_t i = 0; i < points.size(); ++i)
    if (t.contains(points[i])) {
      out.points.push_back(points[i]);
      out.weights.push_back(weights[i]);
    }
  return out;
}

EmpiricalMeasure::EmpiricalMeasure(Dimension d, std::vector<PhasePoint> points)
    : d_(d), z_(std::move(points)) {
  if (z_.empty()) throw ValidationError("empirical measure needs at least one point");
}

DiscreteMeasure EmpiricalMeasure::as_discrete() const {
  return {d_, z_, std::vector<double>(z_.size(), 1.0 / z_.size())};
}

double AveragedMeasure::mass() const {
  double s = 0;
  for (double m : cell_mass) s += m;
  return s;
}

DiscreteMeasure AveragedMeasure::discretize(int sub) const {
  if (sub < 1) throw ValidationError("sub-cell count must be positive");
  int dims = 2 * tiling.dim().value();
  auto sides = tiling.cell_sides();
  std::size_t per_cell = 1;
  for (int k = 0; k < dims; ++k) per_cell *= sub;
  DiscreteMeasure out{tiling.dim(), {}, {}};
  for (std::size_t j = 0; j < cell_mass.size(); ++j) {
    if (cell_mass[j] == 0) continue;
    auto lo = tiling.cell_lower(j);
    double w = cell_mass[j] / per_cell;
    for (std::size_t r = 0; r < per_cell; ++r) {
      std::size_t rr = r;
      std::vector<double> c(dims);
      for (int k = dims - 1; k >= 0; --k) {
        c[k] = lo[k] + (rr % sub + 0.5) * sides[k] / sub;
        rr /= sub;
      }
      PhasePoint z;
      if (dims == 2) {
        z.x[0] = c[0];
        z.p[0] = c[1];
      } else {
        z.x = {c[0], c[1]};
        z.p = {c[2], c[3]};
      }
      out.points.push_back(z);
      out.weights.push_back(w);
    }
  }
  return out;
}

AveragedMeasure average_measure(const DiscreteMeasure& mu, const Tiling& t) {
  if (!(mu.d == t.dim())) throw ValidationError("measure and tiling dimensions differ");
  if (mu.points.size() != mu.weights.size()) throw ValidationError("points and weights differ");
  AveragedMeasure out{t, std::vector<double>(t.cell_count(), 0.0), {}, 0, 0, "discrete"};
  for (std::size_t i = 0; i < mu.points.size(); ++i) {
    double w = mu.weights[i];
    if (!(w >= 0) || !std::isfinite(w)) throw ValidationError("measure weights must be >= 0");
    out.source_mass += w;
    long j = t.cell_of(mu.points[i]);
    if (j < 0)
      out.outside_mass += w;
    else
      out.cell_mass[j] += w;
  }
  return out;
}

AveragedMeasure average_measure(const EmpiricalMeasure& mu, const Tiling& t) {
  if (!(mu.dim() == t.dim())) throw ValidationError("measure and tiling dimensions differ");
  std::vector<long> counts(t.cell_count(), 0);
  long outside = 0;
  for (const auto& z : mu.points()) {
    long j = t.cell_of(z);
    if (j < 0)
      ++outside;
    else
      ++counts[j];
  }
  int n = mu.particles();
  AveragedMeasure out{t, std::vector<double>(counts.size()), {}, 1.0,
                      static_cast<double>(outside) / n, "empirical"};
  out.exact_cell_mass.resize(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    out.exact_cell_mass[j] = Rational(counts[j], n);
    out.cell_mass[j] = static_cast<double>(counts[j]) / n;
  }
  return out;
}

bool violates_pauli(double cell_mass, double cell_volume, Dimension d, double eps) {
  return cell_mass >= (1 + eps) * cell_volume / std::pow(kTwoPi, d.value());
}

PhaseSampler uniform_sampler(const Tiling& t) {
  double half = t.half_width();
  int d = t.dim().value();
  return [half, d](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-half, half);
    PhasePoint z;
    z.x[0] = u(rng);
    if (d == 2) z.x[1] = u(rng);
    z.p[0] = u(rng);
    if (d == 2) z.p[1] = u(rng);
    return z;
  };
}

ConfigurationSampler iid_configurations(PhaseSampler one, int particles) {
  if (particles < 1) throw ValidationError("need at least one particle");
  return [one = std::move(one), particles](std::mt19937_64& rng, std::vector<PhasePoint>& out) {
    out.resize(particles);
    for (auto& z : out) z = one(rng);
  };
}

ConfigurationSampler law_configurations(const FiniteExchangeableLaw& law,
                                        std::vector<PhasePoint> state_points) {
  if (static_cast<int>(state_points.size()) != law.states())
    throw ValidationError("need one phase point per state");
  auto atoms = std::make_shared<std::vector<Counts>>();
  auto cumulative = std::make_shared<std::vector<double>>();
  double acc = 0;
  for (const auto& [c, w] : law.weights()) {
    atoms->push_back(c);
    acc += static_cast<double>(w);
    cumulative->push_back(acc);
  }
  auto pts = std::make_shared<std::vector<PhasePoint>>(std::move(state_points));
  return [atoms, cumulative, pts](std::mt19937_64& rng, std::vector<PhasePoint>& out) {
    std::uniform_real_distribution<double> u(0.0, cumulative->back());
    double r = u(rng);
    auto it = std::upper_bound(cumulative->begin(), cumulative->end(), r);
    std::size_t k = std::min<std::size_t>(it - cumulative->begin(), atoms->size() - 1);
    out.clear();
    const Counts& c = (*atoms)[k];
    for (std::size_t s = 0; s < c.size(); ++s)
      for (int i = 0; i < c[s]; ++i) out.push_back((*pts)[s]);
  };
}

double binomial_upper_tail(int n, double q, double threshold) {
  if (!(q >= 0 && q <= 1)) throw ValidationError("binomial probability outside [0, 1]");
  if (!std::isfinite(threshold)) return 0.0;
  long k = static_cast<long>(std::ceil(threshold - 1e-9));
  if (k <= 0) return 1.0;
  if (k > n) return 0.0;
  boost::math::binomial_distribution<double> b(n, q);
  return boost::math::cdf(boost::math::complement(b, static_cast<double>(k - 1)));
}

PauliStats pauli_violation_stats(const ConfigurationSampler& sampler, int particles,
                                 const Tiling& t, long cell, double epsilon, int trials,
                                 unsigned long long seed, std::optional<double> cell_probability) {
  if (particles < 1) throw ValidationError("need at least one particle");
  if (trials < 1) throw ValidationError("need at least one trial");
  if (!(epsilon >= 0)) throw ValidationError("epsilon must be nonnegative");
  if (cell < 0 || static_cast<std::size_t>(cell) >= t.cell_count())
    throw ValidationError("cell index out of range");
  PauliStats s;
  s.particles = particles;
  s.epsilon = epsilon;
  s.trials = trials;
  s.seed = seed;
  s.cell = cell;
  s.threshold_count =
      particles * (1 + epsilon) * t.cell_volume() / std::pow(kTwoPi, t.dim().value());
  double k_min = std::isfinite(s.threshold_count) ? std::ceil(s.threshold_count - 1e-9)
                                                  : std::numeric_limits<double>::infinity();

  int blocks = (trials + kBlock - 1) / kBlock;
  long hits_cell = 0, hits_any = 0, bad = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : hits_cell, hits_any, bad)
  for (int b = 0; b < blocks; ++b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 rng(seq);
    std::vector<PhasePoint> z;
    std::vector<long> counts(t.cell_count());
    int lo = b * kBlock, hi = std::min(trials, lo + kBlock);
    for (int r = lo; r < hi; ++r) {
      sampler(rng, z);
      if (static_cast<int>(z.size()) != particles) {
        ++bad;  // no throwing across the parallel region
        continue;
      }
      std::fill(counts.begin(), counts.end(), 0);
      for (const auto& p : z) {
        long j = t.cell_of(p);
        if (j >= 0) ++counts[j];
      }
      if (counts[cell] >= k_min) ++hits_cell;
      if (*std::max_element(counts.begin(), counts.end()) >= k_min) ++hits_any;
    }
  }
  if (bad) throw ValidationError("sampler returned the wrong number of particles");
  s.hits_cell = hits_cell;
  s.hits_any = hits_any;
  s.frequency_cell = static_cast<double>(hits_cell) / trials;
  s.frequency_any = static_cast<double>(hits_any) / trials;
  using boost::math::binomial_distribution;
  s.ci_low = binomial_distribution<double>::find_lower_bound_on_p(trials, hits_cell, 0.025);
  s.ci_high = binomial_distribution<double>::find_upper_bound_on_p(trials, hits_cell, 0.025);
  s.any_ci_low = binomial_distribution<double>::find_lower_bound_on_p(trials, hits_any, 0.025);
  s.any_ci_high = binomial_distribution<double>::find_upper_bound_on_p(trials, hits_any, 0.025);
  if (cell_probability) s.exact_tail = binomial_upper_tail(particles, *cell_probability, k_min);
  return s;
}

DecayFit fit_pauli_decay(const std::vector<double>& n, const std::vector<double>& frequency,
                         double delta, double epsilon) {
  if (n.size() != frequency.size()) throw ValidationError("sweep columns differ in length");
  DecayFit f;
  f.n = n;
  f.frequency = frequency;
  f.delta = delta;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < n.size(); ++i)
    if (frequency[i] > 0) {
      xs.push_back(std::pow(n[i], delta));
      ys.push_back(std::log(frequency[i]));
    }
  f.used = static_cast<int>(xs.size());
  if (xs.size() < 2) {
    f.slope = f.intercept = f.rate = std::numeric_limits<double>::quiet_NaN();
    return f;
  }
  auto lf = linear_fit(xs, ys);
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.rate = epsilon > 0 ? -lf.slope / std::log1p(epsilon) : std::numeric_limits<double>::infinity();
  return f;
}

namespace {

double pair_energy(const DiscreteMeasure& mu, const ScaledInteraction* w_n) {
  if (!w_n || mu.points.empty()) return 0.0;
  double range = w_n->support_radius();
  std::size_t n = mu.points.size();
  double s = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : s)
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < n; ++j) {
      double dx = mu.points[i].x[0] - mu.points[j].x[0];
      double dy = mu.points[i].x[1] - mu.points[j].x[1];
      double r = std::hypot(dx, dy);
      if (r < range) row += mu.weights[j] * w_n->radial(r);
    }
    s += mu.weights[i] * row;
  }
  return s;
}

double mean_square(double a, double b) { return (a * a + a * b + b * b) / 3.0; }

}  // namespace

MeasureEnergy measure_energy(const DiscreteMeasure& mu, const TrapPotential& v,
                             const ScaledInteraction* w_n) {
  MeasureEnergy e;
  for (std::size_t i = 0; i < mu.points.size(); ++i) {
    const auto& z = mu.points[i];
    e.one_body += mu.weights[i] * (z.p[0] * z.p[0] + z.p[1] * z.p[1] + v(z.x));
  }
  e.interaction = -pair_energy(mu, w_n);
  e.total = e.one_body + e.interaction;
  return e;
}

MeasureEnergy measure_energy(const AveragedMeasure& mu, const TrapPotential& v,
                             const ScaledInteraction* w_n, int sub) {
  const Tiling& t = mu.tiling;
  int d = t.dim().value();
  MeasureEnergy e;
  for (std::size_t j = 0; j < mu.cell_mass.size(); ++j) {
    double m = mu.cell_mass[j];
    if (m == 0) continue;
    auto lo = t.cell_lower(j);
    double kin = 0, pot = 0;
    if (d == 1) {
      kin = mean_square(lo[1], lo[1] + t.l_p());
      pot = cell_average([&](double x) { return v(Point{x, 0}); }, lo[0], lo[0] + t.l_x());
    } else {
      kin = mean_square(lo[2], lo[2] + t.l_p()) + mean_square(lo[3], lo[3] + t.l_p());
      pot = cell_average(
          [&](double x) {
            return cell_average([&](double y) { return v(Point{x, y}); }, lo[1], lo[1] + t.l_x());
          },
          lo[0], lo[0] + t.l_x());
    }
    e.one_body += m * (kin + pot);
  }
  if (w_n) e.interaction = -pair_energy(mu.discretize(sub), w_n);
  e.total = e.one_body + e.interaction;
  return e;
}

RestrictionReport restriction_energy_defect(const DiscreteMeasure& mu, const Tiling& t,
                                            const TrapPotential& v, const ScaledInteraction* w_n,
                                            double tau, int sub) {
  if (!(mu.d == t.dim()) || !(v.dim() == t.dim()))
    throw ValidationError("measure, potential and tiling dimensions differ");
  RestrictionReport r;
  auto inside = mu.restricted(t);
  auto avg = average_measure(mu, t);
  r.energy = measure_energy(mu, v, w_n).total;
  r.energy_restricted = measure_energy(inside, v, w_n).total;
  r.energy_averaged = measure_energy(avg, v, w_n, sub).total;
  r.restriction_defect = r.energy - r.energy_restricted;
  r.averaging_defect = r.energy_restricted - r.energy_averaged;
  r.lost_mass = avg.outside_mass;
  r.tau = tau;
  r.tau_ok = r.energy <= tau;

  int d = t.dim().value();
  double beta = w_n ? w_n->profile().beta() : 0.0;
  double n = w_n ? w_n->n() : 1.0;
  double l = t.half_width();
  double s = v.bounds().s;
  r.restriction_shape = tau * tau * std::pow(n, d * beta) / std::min(std::pow(l, 4), std::pow(l, 2 * s));
  r.averaging_shape = (t.l_x() + t.l_p()) * (std::abs(r.energy_averaged) + 1);
  r.restriction_fitted_c = std::max(0.0, -r.restriction_defect) / r.restriction_shape;
  r.averaging_fitted_c = std::abs(r.averaging_defect) / r.averaging_shape;
  return r;
}

}  // namespace fermigas
