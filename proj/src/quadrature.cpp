#include "fermigas/quadrature.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace fermigas {

double integrate_interval(const std::function<double(double)>& f, double a, double b,
                          double rel_tol) {
  if (b <= a) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, rel_tol);
}

double radial_integral(Dimension d, const std::function<double(double)>& f, double radius,
                       double rel_tol) {
  using boost::math::constants::pi;
  if (d.value() == 1) return 2.0 * integrate_interval(f, 0.0, radius, rel_tol);
  return 2.0 * pi<double>() *
         integrate_interval([&](double r) { return r * f(r); }, 0.0, radius, rel_tol);
}

double cell_average(const std::function<double(double)>& f, double a, double b) {
  if (b <= a) return f(a);
  return boost::math::quadrature::gauss<double, 8>::integrate(f, a, b) / (b - a);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ValidationError("linear_fit needs at least two paired samples");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  const double vx = sxx - sx * sx / n;
  if (vx <= 0) throw ValidationError("linear_fit: abscissae are all equal");
  LinearFit fit;
  fit.slope = (sxy - sx * sy / n) / vx;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double vy = syy - sy * sy / n;
  fit.r2 = vy > 0 ? (fit.slope * fit.slope * vx) / vy : 1.0;
  return fit;
}

LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw ValidationError("loglog_fit needs positive samples");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly);
}

}  // namespace fermigas
