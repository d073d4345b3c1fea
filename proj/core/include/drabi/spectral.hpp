#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace drabi {

/// Physical parameters of one simulation point. Energies are in units where
/// hbar = k_B = 1; in practice delta = 1 sets the scale.
struct ModelParams {
  double delta = 1.0;      // qubit tunnelling gap
  double omega0 = 0.75;    // cavity frequency
  double g = 0.0;          // qubit-cavity coupling
  double alpha_cav = 0.2;  // cavity-bath Ohmic coupling
  double alpha_q = 0.0;    // direct qubit-bath Ohmic coupling
  double omega_c = 10.0;   // hard frequency cutoff
  double beta = 10.0;      // inverse temperature

  /// Throws DomainError when an invariant is violated. delta = 0 is accepted
  /// (the frozen-spin limit) even though it is outside the physical range.
  void validate() const;
};

/// Low-frequency Ohmic slope of the structured density, 4 g^2 alpha_cav / omega0^2.
double alpha_eff(const ModelParams& p);

struct BathMode {
  double omega;     // normal-mode frequency, > 0
  double coupling;  // l_i, enters as sigma_z l_i (b_i + b_i^dagger)
};

enum class SpectralKind { structured, pure_ohmic, discrete };

std::string to_string(SpectralKind kind);

/// Bath spectral density seen by sigma_z. Immutable value type.
class SpectralDensity {
 public:
  /// Lorentzian-peaked density of a damped cavity plus optional direct Ohmic
  /// term (alpha_q / 2) omega. With truncate = false the Lorentzian part is
  /// integrated to infinity; the Ohmic part is always cut at omega_c.
  static SpectralDensity structured(const ModelParams& p, bool truncate = true);
  static SpectralDensity pure_ohmic(double alpha, double omega_c);
  static SpectralDensity discrete(std::vector<BathMode> modes);

  SpectralKind kind() const { return kind_; }
  const ModelParams& params() const { return params_; }
  const std::vector<BathMode>& modes() const { return modes_; }
  bool truncated() const { return truncate_; }

  /// J(omega). Throws UnsupportedOperation for the discrete kind and
  /// DomainError for omega < 0.
  double operator()(double omega) const;

  /// Lorentzian contribution alone, without cutoff (used for the infinite tail).
  double lorentzian(double omega) const;

  /// Total low-frequency Ohmic coupling: J(omega) ~ (alpha / 2) omega.
  double low_frequency_alpha() const;

  /// True when J vanishes identically (then K = W = 0).
  bool is_zero() const;

  /// Upper end of the finite integration range (omega_c for continuous kinds).
  double cutoff() const;

  /// Interior points where the integrand has structure (Lorentzian peak).
  std::vector<double> breakpoints() const;

  /// One-line description echoed into file headers.
  std::string describe() const;

 private:
  SpectralKind kind_ = SpectralKind::structured;
  ModelParams params_{};
  double ohmic_alpha_ = 0.0;
  bool truncate_ = true;
  std::vector<BathMode> modes_;
};

double eval_spectral_density(const SpectralDensity& sd, double omega);

/// Imaginary-time kernel and its derivative and antiderivatives at one tau.
///   k  = K(tau)  = int J(w) cosh[w(beta/2 - tau)] / sinh(beta w / 2) dw
///   dk = K'(tau)
///   f  = int_0^tau K
///   w  = int_0^tau int_0^s K, so that W(0) = W'(0) = 0
struct KernelMoments {
  double k = 0.0;
  double dk = 0.0;
  double f = 0.0;
  double w = 0.0;
};

/// Frequency-quadrature evaluation of K, K', F and W for 0 <= tau <= beta.
/// rel_tol is the adaptive quadrature target; throws NumericalAccuracyError
/// if it cannot be met.
KernelMoments kernel_moments(const SpectralDensity& sd, double beta, double tau,
                             double rel_tol = 1e-11);

/// K(tau) for 0 < tau < beta; DomainError outside.
double kernel_value(const SpectralDensity& sd, double beta, double tau,
                    double rel_tol = 1e-9);

/// Zero-temperature long-time form alpha / (2 tau^2).
std::function<double(double)> asymptotic_kernel(const SpectralDensity& sd);
std::function<double(double)> asymptotic_kernel(const ModelParams& p);

/// int_0^{omega} J. Continuous kinds only.
double integrated_density(const SpectralDensity& sd, double omega, double rel_tol = 1e-11);

/// int_a^b omega^power J(omega) d omega, continuous kinds only.
double density_moment(const SpectralDensity& sd, double a, double b, int power,
                      double rel_tol = 1e-11);

}  // namespace drabi
