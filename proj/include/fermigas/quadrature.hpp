#pragma once

#include <functional>
#include <vector>

#include "fermigas/model.hpp"

namespace fermigas {

// Adaptive Gauss-Kronrod on [a, b].
double integrate_interval(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-12);

// \int_{|x| < R} f(|x|) dx in R^d.
double radial_integral(Dimension d, const std::function<double(double)>& f, double radius,
                       double rel_tol = 1e-12);

// Mean of f over [a, b] with a fixed 8-point Gauss-Legendre rule.
double cell_average(const std::function<double(double)>& f, double a, double b);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);
// Fit of log y against log x; nonpositive entries are rejected.
LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fermigas
