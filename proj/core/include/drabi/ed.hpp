#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "drabi/spectral.hpp"

namespace drabi {

// Exact diagonalization of
//   H = -(delta/2) sigma_x + sum_i w_i b_i^+ b_i + sigma_z sum_i l_i (b_i + b_i^+) + h sigma_z
// in the product basis qubit (x) truncated Fock spaces.

struct DiscretizedBath {
  std::vector<BathMode> modes;
  std::string provenance;
};

enum class DiscretizationScheme { equal_weight, linear };

std::string to_string(DiscretizationScheme s);
DiscretizationScheme parse_discretization(const std::string& s);

/// Equal-weight bins (each carries int J / n_modes) or equal-width bins on
/// [0, omega_c]; mode frequency is the J-weighted bin mean, l^2 the bin weight.
/// Throws DomainError for n_modes < 1 or a zero density, UnsupportedOperation
/// for a discrete density.
DiscretizedBath discretize_bath(const SpectralDensity& sd, int n_modes,
                                DiscretizationScheme scheme = DiscretizationScheme::equal_weight);

/// "# drabi bath v1" header, provenance comment, then "omega coupling" rows
/// at 17 significant digits, so WLMC and ED can be fed bit-identical modes.
void write_bath(std::ostream& os, const DiscretizedBath& bath);
DiscretizedBath read_bath(std::istream& is);

struct FockSpec {
  std::vector<int> n_max;     // per-mode boson cutoff
  std::size_t budget = 8192;  // maximal Hilbert-space dimension

  std::size_t dimension() const;
  FockSpec doubled() const;
};

/// Dense Hamiltonian. Throws ResourceError before allocating when the
/// dimension exceeds spec.budget, DomainError if n_max does not match the bath.
Eigen::MatrixXd build_hamiltonian(double delta, const DiscretizedBath& bath, const FockSpec& spec,
                                  double h = 0.0);

/// Eigen-decomposition with qubit operators in the eigenbasis. sigma_y is
/// purely imaginary for a real Hamiltonian: <m|sigma_y|n> = i sy_imag(m, n).
struct SpectrumResult {
  Eigen::VectorXd energies;  // ascending
  Eigen::MatrixXd sz;
  Eigen::MatrixXd sx;
  Eigen::MatrixXd sy_imag;
  Eigen::MatrixXd vectors;  // columns are eigenvectors in the product basis
  double span = 0.0;        // E_max - E_min
  double degeneracy_tol = 0.0;

  /// Largest |sum_m |sz_mn|^2 - 1| over n.
  double completeness_residual() const;
  /// Largest asymmetry of sz and sx and symmetric part of sy_imag.
  double hermiticity_residual() const;
};

SpectrumResult diagonalize(double delta, const DiscretizedBath& bath, const FockSpec& spec,
                           double h = 0.0);

/// log Z at inverse temperature beta, with the ground energy as reference:
/// log sum_m exp(-beta (E_m - E_0)).
double log_partition_shifted(const SpectrumResult& s, double beta);

struct ThermalObservables {
  double m2 = 0.0;         // (sigma_z, sigma_z)
  double sigma_x = 0.0;    // <sigma_x>
  double hq = 0.0;         // -(delta / 2) <sigma_x>
  double mori_yy = 0.0;    // (sigma_y, sigma_y)
  double mori_zz = 0.0;    // same as m2
  double delta_eff = 0.0;  // delta sqrt(mori_yy / mori_zz)
  double energy = 0.0;     // <H>
};

/// Kubo-Mori product (A, A) = (1 / (beta Z)) sum |A_mn|^2 f(E_m, E_n) from the
/// squared moduli of the matrix elements.
double mori_product(const SpectrumResult& s, const Eigen::MatrixXd& abs2, double beta);

/// M^2 = (1/beta) int_0^beta <sigma_z(tau) sigma_z(0)> d tau by adaptive
/// quadrature of the imaginary-time correlator (independent of mori_product).
double imaginary_time_m2(const SpectrumResult& s, double beta);

ThermalObservables thermal_observables(const SpectrumResult& s, double delta, double beta);

struct SusceptibilityResult {
  std::vector<std::complex<double>> z;
  std::vector<std::complex<double>> chi;
  std::vector<std::complex<double>> sigma_z;  // i (chi(z) - chi(0)) / (M^2 beta z)
  double chi0 = 0.0;
  double m2 = 0.0;
};

/// chi(z) = (1/Z) sum |sz_mn|^2 (p_m - p_n) / (z - (E_n - E_m)). Throws
/// DomainError when any Im z <= 0.
SusceptibilityResult susceptibility(const SpectrumResult& s, double beta,
                                    const std::vector<std::complex<double>>& z_grid);

/// Laplace-transformed Mori relaxation function of sigma_y,
/// sum |A_mn|^2 f_mn i / (z + E_m - E_n) normalized by (A, A).
std::vector<std::complex<double>> mori_relaxation_y(const SpectrumResult& s, double beta,
                                                    const std::vector<std::complex<double>>& z_grid);

/// Low-frequency sum rule: beta M^2 against -(2/pi) int_0^inf Im chi(w) / w dw,
/// both from the exact Lehmann sums.
struct SumRuleCheck {
  double beta_m2 = 0.0;
  double integral = 0.0;
  double residual = 0.0;  // |difference| / beta_m2
};
SumRuleCheck verify_sum_rule(const SpectrumResult& s, double beta);

/// Relation between the sigma_z and sigma_y relaxation functions,
///   Sigma_z(z) = i/z + delta^2 [(sigma_y,sigma_y)/(sigma_z,sigma_z)] Sigma_y(z) / z^2,
/// checked on a grid. The residual at each z is normalized by the largest of
/// the three terms; returns the maximum over the grid.
double verify_relaxation_identity(const SpectrumResult& s, double delta, double beta,
                                  const std::vector<std::complex<double>>& z_grid);

struct RelaxationTrace {
  std::vector<double> t;
  std::vector<double> sigma_z;
  double h = 0.0;
  double linearity_residual = 0.0;
  bool nonlinear = false;
};

/// Prepare the ground state of H + h sigma_z, switch h off at t = 0 and
/// record <sigma_z(t)> / <sigma_z(0)> by exact evolution. Re-runs at h / 2
/// and flags the trace when the two disagree by more than linearity_tol.
RelaxationTrace relax_sigma_z(double delta, const DiscretizedBath& bath, const FockSpec& spec, double h,
                              const std::vector<double>& t_grid, double linearity_tol = 1e-4);

struct ConvergenceCheck {
  bool converged = false;
  double d_m2 = 0.0;
  double d_sigma_x = 0.0;
  std::string reason;
};

/// Compare M^2 and <sigma_x> at spec and at spec.doubled().
ConvergenceCheck check_truncation(double delta, const DiscretizedBath& bath, const FockSpec& spec,
                                  double beta, double tol = 1e-6);
/// Same for several temperatures, diagonalizing each truncation once.
std::vector<ConvergenceCheck> check_truncation(double delta, const DiscretizedBath& bath, const FockSpec& spec,
                                               const std::vector<double>& betas, double tol = 1e-6);

}  // namespace drabi
