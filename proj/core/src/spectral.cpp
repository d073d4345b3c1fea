#include "drabi/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "drabi/error.hpp"
#include "drabi/quadrature.hpp"

namespace drabi {

void ModelParams::validate() const {
  auto bad = [](const std::string& what) { throw DomainError("ModelParams: " + what); };
  if (!(delta >= 0.0) || !std::isfinite(delta)) bad("delta must be >= 0");
  if (!(omega0 > 0.0)) bad("omega0 must be > 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) bad("beta must be > 0");
  if (!(omega_c > omega0)) bad("omega_c must exceed omega0");
  if (!(g >= 0.0)) bad("g must be >= 0");
  if (!(alpha_cav >= 0.0)) bad("alpha_cav must be >= 0");
  if (!(alpha_q >= 0.0)) bad("alpha_q must be >= 0");
}

double alpha_eff(const ModelParams& p) {
  return 4.0 * p.g * p.g * p.alpha_cav / (p.omega0 * p.omega0);
}

std::string to_string(SpectralKind kind) {
  switch (kind) {
    case SpectralKind::structured: return "structured";
    case SpectralKind::pure_ohmic: return "pure_ohmic";
    case SpectralKind::discrete: return "discrete";
  }
  return "unknown";
}

SpectralDensity SpectralDensity::structured(const ModelParams& p, bool truncate) {
  if (!(p.omega0 > 0.0)) throw DomainError("structured density needs omega0 > 0");
  if (!(p.omega_c > p.omega0)) throw DomainError("structured density needs omega_c > omega0");
  if (p.g < 0.0 || p.alpha_cav < 0.0 || p.alpha_q < 0.0)
    throw DomainError("structured density needs g, alpha_cav, alpha_q >= 0");
  SpectralDensity sd;
  sd.kind_ = SpectralKind::structured;
  sd.params_ = p;
  sd.truncate_ = truncate;
  return sd;
}

SpectralDensity SpectralDensity::pure_ohmic(double alpha, double omega_c) {
  if (!(alpha >= 0.0)) throw DomainError("pure Ohmic alpha must be >= 0");
  if (!(omega_c > 0.0)) throw DomainError("pure Ohmic omega_c must be > 0");
  SpectralDensity sd;
  sd.kind_ = SpectralKind::pure_ohmic;
  sd.ohmic_alpha_ = alpha;
  sd.params_.g = 0.0;
  sd.params_.alpha_cav = 0.0;
  sd.params_.alpha_q = alpha;
  sd.params_.omega_c = omega_c;
  sd.params_.omega0 = std::min(sd.params_.omega0, 0.5 * omega_c);
  return sd;
}

SpectralDensity SpectralDensity::discrete(std::vector<BathMode> modes) {
  for (const auto& m : modes) {
    if (!(m.omega > 0.0) || !std::isfinite(m.omega))
      throw DomainError("discrete bath mode frequencies must be > 0");
    if (!std::isfinite(m.coupling)) throw DomainError("discrete bath couplings must be finite");
  }
  SpectralDensity sd;
  sd.kind_ = SpectralKind::discrete;
  sd.modes_ = std::move(modes);
  return sd;
}

double SpectralDensity::lorentzian(double omega) const {
  const auto& p = params_;
  if (p.g == 0.0 || p.alpha_cav == 0.0) return 0.0;
  const double w2 = omega * omega - p.omega0 * p.omega0;
  const double damp = std::numbers::pi * p.alpha_cav * p.omega0 * omega;
  return 2.0 * p.g * p.g * p.omega0 * p.omega0 * p.alpha_cav * omega / (w2 * w2 + damp * damp);
}

double SpectralDensity::operator()(double omega) const {
  if (kind_ == SpectralKind::discrete)
    throw UnsupportedOperation("a discrete bath has no pointwise spectral density");
  if (!(omega >= 0.0)) throw DomainError("spectral density needs omega >= 0");
  if (kind_ == SpectralKind::pure_ohmic)
    return omega <= params_.omega_c ? 0.5 * ohmic_alpha_ * omega : 0.0;
  double j = 0.0;
  if (omega <= params_.omega_c) {
    j = lorentzian(omega) + 0.5 * params_.alpha_q * omega;
  } else if (!truncate_) {
    j = lorentzian(omega);
  }
  return j;
}

double SpectralDensity::low_frequency_alpha() const {
  switch (kind_) {
    case SpectralKind::structured: return params_.alpha_q + alpha_eff(params_);
    case SpectralKind::pure_ohmic: return ohmic_alpha_;
    case SpectralKind::discrete: return 0.0;
  }
  return 0.0;
}

bool SpectralDensity::is_zero() const {
  switch (kind_) {
    case SpectralKind::structured:
      return params_.alpha_q == 0.0 && (params_.g == 0.0 || params_.alpha_cav == 0.0);
    case SpectralKind::pure_ohmic: return ohmic_alpha_ == 0.0;
    case SpectralKind::discrete:
      return std::all_of(modes_.begin(), modes_.end(),
                         [](const BathMode& m) { return m.coupling == 0.0; });
  }
  return true;
}

double SpectralDensity::cutoff() const {
  if (kind_ == SpectralKind::discrete) {
    double top = 0.0;
    for (const auto& m : modes_) top = std::max(top, m.omega);
    return top;
  }
  return params_.omega_c;
}

std::vector<double> SpectralDensity::breakpoints() const {
  std::vector<double> out;
  if (kind_ != SpectralKind::structured || params_.g == 0.0 || params_.alpha_cav == 0.0) return out;
  const double w0 = params_.omega0;
  const double half_width = 0.5 * std::numbers::pi * params_.alpha_cav * w0;
  for (double k : {-8.0, -3.0, -1.0, 0.0, 1.0, 3.0, 8.0}) {
    const double x = w0 + k * half_width;
    if (x > 0.0 && x < params_.omega_c) out.push_back(x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string SpectralDensity::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "kind=" << to_string(kind_);
  if (kind_ == SpectralKind::structured) {
    os << " delta=" << params_.delta << " omega0=" << params_.omega0 << " g=" << params_.g
       << " alpha_cav=" << params_.alpha_cav << " alpha_q=" << params_.alpha_q
       << " omega_c=" << params_.omega_c << " truncate=" << (truncate_ ? 1 : 0);
  } else if (kind_ == SpectralKind::pure_ohmic) {
    os << " alpha=" << ohmic_alpha_ << " omega_c=" << params_.omega_c;
  } else {
    os << " modes=";
    for (std::size_t i = 0; i < modes_.size(); ++i)
      os << (i ? "," : "") << modes_[i].omega << ":" << modes_[i].coupling;
  }
  return os.str();
}

double eval_spectral_density(const SpectralDensity& sd, double omega) { return sd(omega); }

namespace {

// x + expm1(-x), accurate for small x.
double x_plus_expm1_neg(double x) {
  if (x < 0.1) {
    // x^2/2 - x^3/6 + x^4/24 - ... through x^13
    double term = x * x / 2.0;
    double sum = term;
    for (int n = 3; n <= 13; ++n) {
      term *= -x / n;
      sum += term;
    }
    return sum;
  }
  return x + std::expm1(-x);
}

// Bose-propagator factors at frequency omega for kernel, its derivative, and the
// first and second tau-antiderivatives, multiplied by the density weight.
quad::Vec<4> propagator_factors(double weight, double omega, double beta, double tau) {
  const double s = omega * beta;
  const double x = omega * tau;
  const double y = omega * (beta - tau);
  const double den = -std::expm1(-s);
  const double ex = std::exp(-x);
  const double ey = std::exp(-y);
  const double one_minus_ex = -std::expm1(-x);
  const double one_minus_ey = -std::expm1(-y);

  quad::Vec<4> out{};
  out[0] = weight * (ex + ey) / den;
  out[1] = -weight * omega * (ex - ey) / den;
  out[2] = weight / omega * one_minus_ex * (1.0 + ey) / den;
  out[3] = weight / (omega * omega) *
           (x * ey * one_minus_ex / den + x_plus_expm1_neg(x) * one_minus_ey / den);
  return out;
}

void check_accuracy(bool converged, double achieved, double target, const char* what) {
  if (!converged) {
    std::ostringstream os;
    os << what << ": quadrature did not reach rel tol " << target << " (achieved " << achieved
       << ")";
    throw NumericalAccuracyError(os.str(), achieved);
  }
}

}  // namespace

KernelMoments kernel_moments(const SpectralDensity& sd, double beta, double tau, double rel_tol) {
  if (!(beta > 0.0)) throw DomainError("kernel needs beta > 0");
  if (!(tau >= 0.0 && tau <= beta)) throw DomainError("kernel needs 0 <= tau <= beta");
  KernelMoments out;
  if (sd.is_zero()) return out;

  if (sd.kind() == SpectralKind::discrete) {
    for (const auto& m : sd.modes()) {
      const auto v = propagator_factors(m.coupling * m.coupling, m.omega, beta, tau);
      out.k += v[0];
      out.dk += v[1];
      out.f += v[2];
      out.w += v[3];
    }
    return out;
  }

  const double wc = sd.cutoff();
  std::vector<double> breaks = sd.breakpoints();
  for (double scale : {1.0 / beta, 10.0 / beta}) breaks.push_back(scale);
  if (tau > 0.0) breaks.push_back(1.0 / tau);
  if (beta - tau > 0.0) breaks.push_back(1.0 / (beta - tau));
  std::sort(breaks.begin(), breaks.end());

  std::function<quad::Vec<4>(double)> integrand = [&](double w) {
    return propagator_factors(sd(w), w, beta, tau);
  };

  // Absolute floor for K' which vanishes at tau = beta/2.
  const double jscale = 0.5 * sd.low_frequency_alpha() * wc * wc + 1e-300;
  quad::Options opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = rel_tol * 1e-8 * jscale;
  auto r = quad::integrate<4>(integrand, 0.0, wc, breaks, opt);
  double achieved = 0.0;
  for (int c = 0; c < 4; ++c)
    if (r.value[c] != 0.0) achieved = std::max(achieved, r.error[c] / std::abs(r.value[c]));
  check_accuracy(r.converged, achieved, rel_tol, "kernel_moments");

  out.k = r.value[0];
  out.dk = r.value[1];
  out.f = r.value[2];
  out.w = r.value[3];

  if (sd.kind() == SpectralKind::structured && !sd.truncated()) {
    // Lorentzian tail on [omega_c, inf) through omega = omega_c / t.
    std::function<quad::Vec<4>(double)> tail = [&](double t) {
      const double w = wc / t;
      auto v = propagator_factors(sd.lorentzian(w), w, beta, tau);
      for (auto& c : v) c *= wc / (t * t);
      return v;
    };
    auto rt = quad::integrate<4>(tail, 0.0, 1.0, {}, opt);
    check_accuracy(rt.converged, 0.0, rel_tol, "kernel_moments tail");
    out.k += rt.value[0];
    out.dk += rt.value[1];
    out.f += rt.value[2];
    out.w += rt.value[3];
  }
  return out;
}

double kernel_value(const SpectralDensity& sd, double beta, double tau, double rel_tol) {
  if (!(tau > 0.0 && tau < beta)) throw DomainError("kernel_value needs 0 < tau < beta");
  return kernel_moments(sd, beta, tau, rel_tol).k;
}

std::function<double(double)> asymptotic_kernel(const SpectralDensity& sd) {
  const double a = sd.low_frequency_alpha();
  return [a](double tau) { return a / (2.0 * tau * tau); };
}

std::function<double(double)> asymptotic_kernel(const ModelParams& p) {
  const double a = p.alpha_q + alpha_eff(p);
  return [a](double tau) { return a / (2.0 * tau * tau); };
}

double density_moment(const SpectralDensity& sd, double a, double b, int power, double rel_tol) {
  if (sd.kind() == SpectralKind::discrete)
    throw UnsupportedOperation("density_moment needs a continuous density");
  if (sd.is_zero() || !(b > a)) return 0.0;
  std::function<quad::Vec<1>(double)> f = [&](double w) {
    return quad::Vec<1>{sd(w) * std::pow(w, power)};
  };
  quad::Options opt;
  opt.rel_tol = rel_tol;
  const auto breaks = sd.breakpoints();
  auto r = quad::integrate<1>(f, a, std::min(b, sd.cutoff()), breaks, opt);
  check_accuracy(r.converged, r.error[0] / std::max(std::abs(r.value[0]), 1e-300), rel_tol,
                 "density_moment");
  return r.value[0];
}

double integrated_density(const SpectralDensity& sd, double omega, double rel_tol) {
  return density_moment(sd, 0.0, omega, 0, rel_tol);
}

}  // namespace drabi
