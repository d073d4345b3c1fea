#pragma once

// Independent reference computations used by the unit tests. Everything here
// is written from the defining formulas with Boost quadrature (tanh-sinh and
// nested Gauss-Kronrod), so it shares no code path with the library's
// adaptive GK21 integrator or its closed-form moment expressions.

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

inline double lorentzian_density(double w, double g, double omega0, double alpha_cav) {
  const double d = w * w - omega0 * omega0;
  const double pw = std::numbers::pi * alpha_cav * omega0 * w;
  return 2.0 * g * g * omega0 * omega0 * alpha_cav * w / (d * d + pw * pw);
}

// cosh(w (beta/2 - tau)) / sinh(beta w / 2), written without overflow.
inline double thermal_factor(double w, double beta, double tau) {
  return (std::exp(-w * tau) + std::exp(-w * (beta - tau))) / -std::expm1(-w * beta);
}

template <class J>
double kernel(J density, double beta, double tau, double wc, double peak) {
  boost::math::quadrature::tanh_sinh<double> ts(15);
  auto f = [&](double w) { return w <= 0.0 ? 0.0 : density(w) * thermal_factor(w, beta, tau); };
  double total = 0.0;
  double a = 0.0;
  for (double b : {0.5 * peak, peak, 2.0 * peak, wc}) {
    if (b <= a || b > wc) continue;
    total += ts.integrate(f, a, b, 1e-13);
    a = b;
  }
  return total;
}

}  // namespace oracle
