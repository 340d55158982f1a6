#include "fermigas/model.hpp"

#include <algorithm>
#include <limits>
#include <boost/math/constants/constants.hpp>
#include <numeric>
#include <sstream>

#include "fermigas/quadrature.hpp"

namespace fermigas {

namespace {
constexpr double kPi = boost::math::constants::pi<double>();
}

MassJumpError::MassJumpError(double gap, double lambda_lo, double lambda_hi)
    : NumericError([&] {
        std::ostringstream os;
        os.precision(12);
        os << "mass jump: no chemical potential reaches unit mass (gap " << gap
           << ", bracket [" << lambda_lo << ", " << lambda_hi << "])";
        return os.str();
      }()),
      gap_(gap),
      lambda_lo_(lambda_lo),
      lambda_hi_(lambda_hi) {}

Dimension::Dimension(int d) : d_(d) {
  if (d != 1 && d != 2)
    throw ValidationError("dimension must be 1 or 2 (got " + std::to_string(d) +
                          "); the attractive gas is only stable for d <= 2");
}

std::string to_string(ConstantsConvention c) {
  return c == ConstantsConvention::PaperLiteral ? "paper_literal" : "bath_tub_consistent";
}

ConstantsConvention constants_convention_from_string(const std::string& s) {
  if (s == "paper_literal" || s == "PaperLiteral") return ConstantsConvention::PaperLiteral;
  if (s == "bath_tub_consistent" || s == "BathTubConsistent")
    return ConstantsConvention::BathTubConsistent;
  throw ValidationError("unknown constants convention '" + s +
                        "' (expected paper_literal or bath_tub_consistent)");
}

TFConstants TFConstants::make(Dimension d, ConstantsConvention source) {
  TFConstants c;
  c.d = d;
  c.source = source;
  c.c_d = d.value() == 1 ? kPi : std::sqrt(4.0 * kPi);
  if (source == ConstantsConvention::PaperLiteral) {
    c.c_tf = d.value() == 1 ? kPi * kPi : 8.0 * kPi;
  } else {
    const double dd = d.value();
    c.c_tf = dd * c.c_d * c.c_d / (dd + 2.0);
  }
  return c;
}

double TFConstants::fermi_radius(double rho) const {
  if (rho <= 0) return 0.0;
  return d.value() == 1 ? c_d * rho : c_d * std::sqrt(rho);
}

double lift_kinetic_density(Dimension d, double c_d, double rho) {
  if (rho <= 0) return 0.0;
  if (d.value() == 1) {
    const double r = c_d * rho;
    return r * r * r / (3.0 * kPi);
  }
  const double r2 = c_d * c_d * rho;
  return r2 * r2 / (8.0 * kPi);
}

// ---------------------------------------------------------------------------

TrapPotential::TrapPotential(Dimension d, std::string name, Value v, Gradient g,
                             GrowthBounds bounds, bool level_sets_null, ProbeOptions probe)
    : d_(d),
      name_(std::move(name)),
      v_(std::move(v)),
      g_(std::move(g)),
      bounds_(bounds),
      level_sets_null_(level_sets_null) {
  if (!(bounds_.s > 0)) throw ValidationError("growth exponent s must be positive");
  if (d.value() == 1 && !level_sets_null_)
    throw ValidationError("potential '" + name_ +
                          "': in d = 1 the level sets of V must have zero measure");

  const int m = d.value() == 1 ? probe.points_per_axis_1d : probe.points_per_axis_2d;
  const double step = 2.0 * probe.radius / (m - 1);
  auto check = [&](const Point& x) {
    const double val = v_(x);
    const double r = norm(x);
    const double tol = probe.slack * (1.0 + std::abs(val));
    if (!(val >= -tol)) throw ValidationError("potential '" + name_ + "' is negative at a probe point");
    if (val < bounds_.lower_c * std::pow(r, bounds_.s) - bounds_.lower_shift - tol)
      throw ValidationError("potential '" + name_ + "' violates V >= C|x|^s - c on the probe grid");
    if (g_) {
      const Point gr = g_(x);
      const double rs = r > 0 ? std::pow(r, bounds_.s - 1.0)
                             : (bounds_.s < 1 ? std::numeric_limits<double>::infinity()
                                              : (bounds_.s == 1 ? 1.0 : 0.0));
      const double cap = bounds_.gradient_c * (rs + 1.0);
      if (norm(gr) > cap * (1.0 + probe.slack) + probe.slack)
        throw ValidationError("potential '" + name_ +
                              "' violates |grad V| <= C(|x|^{s-1} + 1) on the probe grid");
    }
  };
  for (int i = 0; i < m; ++i) {
    const double xi = -probe.radius + i * step;
    if (d.value() == 1) {
      check({xi, 0.0});
    } else {
      for (int j = 0; j < m; ++j) check({xi, -probe.radius + j * step});
    }
  }
}

TrapPotential TrapPotential::harmonic(Dimension d, double k) {
  if (!(k > 0)) throw ValidationError("harmonic strength must be positive");
  return TrapPotential(
      d, "harmonic", [k](const Point& x) { return k * (x[0] * x[0] + x[1] * x[1]); },
      [k](const Point& x) { return Point{2 * k * x[0], 2 * k * x[1]}; },
      GrowthBounds{2.0, k, 0.0, 2.0 * k}, true);
}

TrapPotential TrapPotential::quartic(Dimension d, double a) {
  if (!(a > 0)) throw ValidationError("quartic strength must be positive");
  return TrapPotential(
      d, "quartic",
      [a](const Point& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return a * r2 * r2;
      },
      [a](const Point& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return Point{4 * a * r2 * x[0], 4 * a * r2 * x[1]};
      },
      GrowthBounds{4.0, a, 0.0, 4.0 * a}, true);
}

TrapPotential TrapPotential::double_well(Dimension d, double a, double b) {
  if (!(a > 0) || !(b > 0)) throw ValidationError("double_well parameters must be positive");
  return TrapPotential(
      d, "double_well",
      [a, b](const Point& x) {
        const double u = x[0] * x[0] + x[1] * x[1] - a * a;
        return b * u * u;
      },
      [a, b](const Point& x) {
        const double u = x[0] * x[0] + x[1] * x[1] - a * a;
        return Point{4 * b * u * x[0], 4 * b * u * x[1]};
      },
      GrowthBounds{4.0, 0.5 * b, b * a * a * a * a, 4.0 * b * (1.0 + a * a)}, true);
}

// ---------------------------------------------------------------------------

std::string to_string(BetaRange r) {
  return r == BetaRange::Theorem ? "theorem" : "upper_bound_only";
}

InteractionProfile::InteractionProfile(Dimension d, std::string family, Radial profile,
                                       Radial derivative, double support_radius, double beta,
                                       double gradient_tv)
    : d_(d),
      family_(std::move(family)),
      w_(std::move(profile)),
      deriv_(std::move(derivative)),
      radius_(support_radius),
      beta_(beta) {
  const double dd = d.value();
  if (!(beta > 0) || !(beta < 1.0 / dd)) {
    std::ostringstream os;
    os << "beta must lie in (0, 1/d) = (0, " << 1.0 / dd << "), got " << beta;
    throw ValidationError(os.str());
  }
  if (!(support_radius > 0) || !std::isfinite(support_radius))
    throw ValidationError("interaction support radius must be finite and positive");
  range_ = beta < 2.0 / (dd * (2.0 * dd + 1.0)) ? BetaRange::Theorem : BetaRange::UpperBoundOnly;

  const int probes = 2001;
  for (int i = 0; i < probes; ++i) {
    const double r = radius_ * i / (probes - 1.0);
    const double v = w_(r);
    if (!(v >= 0.0)) throw ValidationError("interaction profile '" + family_ + "' is negative");
    sup_ = std::max(sup_, v);
  }
  i_w_ = radial_integral(d, w_, radius_);
  if (!std::isfinite(i_w_) || i_w_ < 0) throw ValidationError("interaction integral is not finite");

  if (deriv_) {
    grad_l1_ = radial_integral(d, [&](double r) { return std::abs(deriv_(r)); }, radius_);
    const double q = 1.0 + dd / 2.0;
    grad_lq_ = std::pow(
        radial_integral(d, [&](double r) { return std::pow(std::abs(deriv_(r)), q); }, radius_),
        1.0 / q);
  } else {
    if (!(gradient_tv >= 0))
      throw ValidationError("profile with jumps needs its total variation");
    grad_l1_ = gradient_tv;
    grad_lq_ = std::numeric_limits<double>::infinity();
  }
}

InteractionProfile InteractionProfile::indicator(Dimension d, double height, double radius,
                                                 double beta) {
  if (!(height >= 0)) throw ValidationError("indicator height must be nonnegative");
  const double tv = d.value() == 1 ? 2.0 * height : 2.0 * kPi * radius * height;
  return InteractionProfile(
      d, "indicator", [height, radius](double r) { return r < radius ? height : 0.0; }, {},
      radius, beta, tv);
}

InteractionProfile InteractionProfile::bump(Dimension d, double height, double radius,
                                            double beta) {
  if (!(height >= 0)) throw ValidationError("bump height must be nonnegative");
  auto w = [height, radius](double r) {
    const double t = r / radius;
    if (t >= 1.0) return 0.0;
    return height * std::exp(1.0 - 1.0 / (1.0 - t * t));
  };
  auto dw = [height, radius](double r) {
    const double t = r / radius;
    if (t >= 1.0) return 0.0;
    const double u = 1.0 - t * t;
    return -height * std::exp(1.0 - 1.0 / u) * 2.0 * t / (u * u * radius);
  };
  return InteractionProfile(d, "bump", w, dw, radius, beta);
}

InteractionProfile InteractionProfile::zero(Dimension d, double beta) {
  return InteractionProfile(
      d, "zero", [](double) { return 0.0; }, [](double) { return 0.0; }, 1.0, beta);
}

double InteractionProfile::radial(double r) const { return r < radius_ ? w_(r) : 0.0; }

double InteractionProfile::radial_derivative(double r) const {
  if (!deriv_) throw ValidationError("profile '" + family_ + "' has no pointwise derivative");
  return r < radius_ ? deriv_(r) : 0.0;
}

void InteractionProfile::check_against(const TFConstants& constants) const {
  if (!(constants.d == d_)) throw ValidationError("interaction and constants disagree on d");
  if (d_.value() == 2 && !(i_w_ < constants.c_tf)) {
    std::ostringstream os;
    os << "d = 2 requires I_w < c_TF; got I_w = " << i_w_ << ", c_TF = " << constants.c_tf;
    throw ValidationError(os.str());
  }
}

ScaledInteraction::ScaledInteraction(std::shared_ptr<const InteractionProfile> w, double n)
    : w_(std::move(w)), n_(n) {
  if (!w_) throw ValidationError("scaled interaction needs a profile");
  if (!(n >= 1)) throw ValidationError("particle count N must be >= 1");
  const double beta = w_->beta();
  amp_ = std::pow(n, w_->dim().value() * beta);
  len_ = std::pow(n, -beta);
}

ScaledInteraction scaled_interaction(std::shared_ptr<const InteractionProfile> w, double n) {
  return ScaledInteraction(std::move(w), n);
}

// ---------------------------------------------------------------------------

SpatialGrid::SpatialGrid(Dimension d, double half_width, int points)
    : d_(d), half_(half_width), m_(points) {
  if (points < 2) throw ValidationError("grid needs at least 2 points per axis");
  if (!(half_width > 0) || !std::isfinite(half_width))
    throw ValidationError("grid half-width must be positive");
  h_ = 2.0 * half_width / points;
}

std::size_t SpatialGrid::size() const noexcept {
  const auto m = static_cast<std::size_t>(m_);
  return d_.value() == 1 ? m : m * m;
}

double SpatialGrid::cell_volume() const noexcept { return d_.value() == 1 ? h_ : h_ * h_; }

Point SpatialGrid::point(std::size_t flat) const noexcept {
  if (d_.value() == 1) return {coordinate(static_cast<int>(flat)), 0.0};
  const auto m = static_cast<std::size_t>(m_);
  return {coordinate(static_cast<int>(flat / m)), coordinate(static_cast<int>(flat % m))};
}

std::vector<double> sample(const TrapPotential& v, const SpatialGrid& grid) {
  if (!(v.dim() == grid.dim())) throw ValidationError("potential and grid disagree on d");
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v(grid.point(i));
  return out;
}

double integrate(const SpatialGrid& grid, const std::vector<double>& values) {
  if (values.size() != grid.size()) throw ValidationError("grid function has the wrong size");
  return grid.cell_volume() * std::accumulate(values.begin(), values.end(), 0.0);
}

DensityField::DensityField(SpatialGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw ValidationError("density has the wrong size for its grid");
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v))
      throw ValidationError("density values must be finite and nonnegative");
}

DensityField DensityField::zeros(SpatialGrid grid) {
  const std::size_t n = grid.size();
  return DensityField(grid, std::vector<double>(n, 0.0));
}

double DensityField::mass() const { return integrate(grid_, values_); }

double DensityField::lp_norm_pow(double p) const {
  double s = 0;
  for (double v : values_) s += v > 0 ? std::pow(v, p) : 0.0;
  return s * grid_.cell_volume();
}

double DensityField::max() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

// ---------------------------------------------------------------------------

ConstantsAudit audit_constants(const DensityField& probe) {
  const Dimension d = probe.grid().dim();
  ConstantsAudit a;
  a.d = d;
  a.paper_literal = TFConstants::make(d, ConstantsConvention::PaperLiteral);
  a.bath_tub = TFConstants::make(d, ConstantsConvention::BathTubConsistent);
  a.probe_mass = probe.mass();
  const double q = 1.0 + 2.0 / d.value();
  const double moment = probe.lp_norm_pow(q);
  a.tf_kinetic_paper = a.paper_literal.c_tf * moment;
  a.tf_kinetic_bathtub = a.bath_tub.c_tf * moment;
  double lp = 0, lb = 0;
  for (double r : probe.values()) {
    lp += lift_kinetic_density(d, a.paper_literal.c_d, r);
    lb += lift_kinetic_density(d, a.bath_tub.c_d, r);
  }
  a.lift_kinetic_paper = lp * probe.grid().cell_volume();
  a.lift_kinetic_bathtub = lb * probe.grid().cell_volume();
  a.mismatch_factor_paper = a.lift_kinetic_paper > 0 ? a.tf_kinetic_paper / a.lift_kinetic_paper : 0.0;
  return a;
}

ConstantsAudit audit_constants(Dimension d) {
  const SpatialGrid grid(d, 6.0, d.value() == 1 ? 2048 : 256);
  std::vector<double> rho(grid.size());
  const double norm_c = d.value() == 1 ? 1.0 / std::sqrt(kPi) : 1.0 / kPi;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const Point x = grid.point(i);
    rho[i] = norm_c * std::exp(-(x[0] * x[0] + x[1] * x[1]));
  }
  return audit_constants(DensityField(grid, std::move(rho)));
}

}  // namespace fermigas
