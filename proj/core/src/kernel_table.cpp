#include "drabi/kernel_table.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "drabi/error.hpp"

namespace drabi {
namespace {

constexpr const char* kMagic = "# drabi kernel table v1";

// Quintic Hermite on t in [0, 1] with values, first and second derivatives
// (already multiplied by h and h^2) at both ends.
inline double quintic(double t, double y0, double y1, double d0, double d1, double s0, double s1) {
  const double u = 1.0 - t;
  const double t2 = t * t, t3 = t2 * t;
  const double u2 = u * u, u3 = u2 * u;
  const double h0 = u3 * (6.0 * t2 + 3.0 * t + 1.0);
  const double h1 = t3 * (6.0 * u2 + 3.0 * u + 1.0);
  const double g0 = t * u3 * (3.0 * t + 1.0);
  const double g1 = -u * t3 * (3.0 * u + 1.0);
  const double c0 = 0.5 * t2 * u3;
  const double c1 = 0.5 * u2 * t3;
  return y0 * h0 + y1 * h1 + d0 * g0 + d1 * g1 + s0 * c0 + s1 * c1;
}

inline double cubic(double t, double y0, double y1, double d0, double d1) {
  const double t2 = t * t, t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * d0 + (-2.0 * t3 + 3.0 * t2) * y1 +
         (t3 - t2) * d1;
}

double rel_err(double approx, double exact, double floor) {
  return std::abs(approx - exact) / std::max(std::abs(exact), floor);
}

}  // namespace

void KernelTable::finish_grid() {
  half_ = 0.5 * beta_;
  tau_.clear();
  tau_.push_back(0.0);
  for (int o = 0; o < octaves_; ++o)
    for (int j = 0; j < ppo_; ++j)
      tau_.push_back(std::ldexp(tau0_, o) * (1.0 + static_cast<double>(j) / ppo_));
  tau_.push_back(half_);
}

KernelTable KernelTable::build(const SpectralDensity& sd, double beta, const KernelGridSpec& spec) {
  if (!(beta > 0.0)) throw DomainError("kernel table needs beta > 0");
  if (!(spec.tau_min > 0.0) || spec.points_per_octave < 1)
    throw DomainError("kernel grid needs tau_min > 0 and points_per_octave >= 1");

  KernelTable t;
  t.beta_ = beta;
  t.spec_ = spec;
  t.ppo_ = spec.points_per_octave;
  t.source_ = sd.describe();
  const double half = 0.5 * beta;
  t.octaves_ = std::max(1, static_cast<int>(std::ceil(std::log2(half / spec.tau_min))));
  t.tau0_ = std::ldexp(half, -t.octaves_);
  t.finish_grid();

  const std::size_t n = t.tau_.size();
  t.k_.assign(n, 0.0);
  t.dk_.assign(n, 0.0);
  t.f_.assign(n, 0.0);
  t.w_.assign(n, 0.0);
  t.zero_ = sd.is_zero();
  if (t.zero_) {
    t.tol_ = 0.0;
    return t;
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto m = kernel_moments(sd, beta, t.tau_[i], spec.quad_rel_tol);
    t.k_[i] = m.k;
    t.dk_[i] = m.dk;
    t.f_[i] = m.f;
    t.w_[i] = m.w;
  }
  t.w_[0] = 0.0;
  t.f_[0] = 0.0;
  t.total_ = 2.0 * t.f_.back();

  // Certify against direct quadrature at every cell midpoint.
  double worst = spec.quad_rel_tol;
  const double kfloor = 1e-12 * *std::max_element(t.k_.begin(), t.k_.end());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double mid = 0.5 * (t.tau_[i] + t.tau_[i + 1]);
    const auto m = kernel_moments(sd, beta, mid, spec.quad_rel_tol);
    worst = std::max(worst, rel_err(t.k_half(mid), m.k, kfloor));
    worst = std::max(worst, rel_err(t.w_half(mid), m.w, 1e-300));
  }
  t.tol_ = 2.0 * worst;
  if (t.tol_ > spec.target_tol) {
    std::ostringstream os;
    os << "kernel table interpolation error " << t.tol_ << " exceeds target " << spec.target_tol
       << "; refine the grid";
    throw NumericalAccuracyError(os.str(), t.tol_);
  }
  return t;
}

std::size_t KernelTable::cell(double tau) const {
  if (tau < tau0_) return 0;
  int e = 0;
  const double m = std::frexp(tau / tau0_, &e);
  const int octave = e - 1;
  const int j = static_cast<int>((2.0 * m - 1.0) * ppo_);
  const std::size_t c = 1 + static_cast<std::size_t>(octave) * ppo_ + static_cast<std::size_t>(j);
  return std::min(c, tau_.size() - 2);
}

double KernelTable::w_half(double tau) const {
  if (zero_) return 0.0;
  const std::size_t c = cell(tau);
  const double h = tau_[c + 1] - tau_[c];
  const double t = (tau - tau_[c]) / h;
  return quintic(t, w_[c], w_[c + 1], h * f_[c], h * f_[c + 1], h * h * k_[c], h * h * k_[c + 1]);
}

double KernelTable::f_half(double tau) const {
  if (zero_) return 0.0;
  const std::size_t c = cell(tau);
  const double h = tau_[c + 1] - tau_[c];
  const double t = (tau - tau_[c]) / h;
  return cubic(t, f_[c], f_[c + 1], h * k_[c], h * k_[c + 1]);
}

double KernelTable::k_half(double tau) const {
  if (zero_) return 0.0;
  const std::size_t c = cell(tau);
  const double h = tau_[c + 1] - tau_[c];
  const double t = (tau - tau_[c]) / h;
  return cubic(t, k_[c], k_[c + 1], h * dk_[c], h * dk_[c + 1]);
}

double KernelTable::K(double tau) const {
  if (!(tau >= 0.0 && tau <= beta_)) throw DomainError("KernelTable::K outside [0, beta]");
  return tau <= half_ ? k_half(tau) : k_half(beta_ - tau);
}

double KernelTable::W(double tau) const {
  if (!(tau >= 0.0 && tau <= beta_)) throw DomainError("KernelTable::W outside [0, beta]");
  return w_unchecked(tau);
}

double KernelTable::F(double tau) const {
  if (!(tau >= 0.0 && tau <= beta_)) throw DomainError("KernelTable::F outside [0, beta]");
  return tau <= half_ ? f_half(tau) : total_ - f_half(beta_ - tau);
}

void KernelTable::write(std::ostream& os) const {
  os << kMagic << '\n';
  os << std::setprecision(17);
  os << "# source: " << source_ << '\n';
  os << "# beta: " << beta_ << '\n';
  os << "# tau0: " << tau0_ << '\n';
  os << "# points_per_octave: " << ppo_ << '\n';
  os << "# octaves: " << octaves_ << '\n';
  os << "# zero: " << (zero_ ? 1 : 0) << '\n';
  os << "# tol: " << tol_ << '\n';
  os << "# total: " << total_ << '\n';
  os << "# columns: tau K W F dK\n";
  for (std::size_t i = 0; i < tau_.size(); ++i)
    os << tau_[i] << ' ' << k_[i] << ' ' << w_[i] << ' ' << f_[i] << ' ' << dk_[i] << '\n';
}

KernelTable KernelTable::read(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMagic)
    throw ParseError("kernel table: missing or unsupported version header");
  KernelTable t;
  bool have_beta = false, have_tau0 = false, have_ppo = false, have_oct = false;
  while (is.peek() == '#') {
    std::getline(is, line);
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(2, colon - 2);
    std::string value = line.substr(colon + 1);
    value.erase(0, value.find_first_not_of(' '));
    if (key == "source") t.source_ = value;
    else if (key == "beta") { t.beta_ = std::stod(value); have_beta = true; }
    else if (key == "tau0") { t.tau0_ = std::stod(value); have_tau0 = true; }
    else if (key == "points_per_octave") { t.ppo_ = std::stoi(value); have_ppo = true; }
    else if (key == "octaves") { t.octaves_ = std::stoi(value); have_oct = true; }
    else if (key == "zero") t.zero_ = std::stoi(value) != 0;
    else if (key == "tol") t.tol_ = std::stod(value);
    else if (key == "total") t.total_ = std::stod(value);
  }
  if (!(have_beta && have_tau0 && have_ppo && have_oct))
    throw ParseError("kernel table: incomplete header");
  t.finish_grid();
  const std::size_t n = t.tau_.size();
  t.k_.resize(n);
  t.w_.resize(n);
  t.f_.resize(n);
  t.dk_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double tau = 0.0;
    if (!(is >> tau >> t.k_[i] >> t.w_[i] >> t.f_[i] >> t.dk_[i]))
      throw ParseError("kernel table: truncated body at row " + std::to_string(i));
    if (std::abs(tau - t.tau_[i]) > 1e-15 * std::max(1.0, tau))
      throw ParseError("kernel table: grid mismatch at row " + std::to_string(i));
  }
  t.spec_.tau_min = t.tau0_;
  t.spec_.points_per_octave = t.ppo_;
  return t;
}

}  // namespace drabi
