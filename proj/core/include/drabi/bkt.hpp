#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "drabi/spectral.hpp"
#include "drabi/stats.hpp"

namespace drabi {

/// One (coupling, beta) measurement of the scaled order parameter
/// Psi = alpha * M^2, where alpha is the total low-frequency Ohmic coupling.
/// `g` is the swept control variable (g for structured baths, alpha itself
/// for a pure Ohmic bath).
struct PsiPoint {
  double g = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double psi = 0.0;
  double psi_err = 0.0;
};

struct ValueWithError {
  double value = 0.0;
  double error = 0.0;
};

/// Psi = alpha * m2 with propagated error. m2.mean must lie in [0, 1].
ValueWithError psi(double alpha, const MCEstimate& m2);
PsiPoint make_psi_point(double g, double alpha, double beta, const MCEstimate& m2);

/// G = 1 / (Psi - 1) - 2 ln beta.
struct GValue {
  double value = 0.0;
  double error = 0.0;
  bool usable = true;
  std::string reason;  // why the point is excluded from crossing fits
};

/// Throws DomainError at the pole Psi = 1. Points with Psi <= 1 + 3 psi_err
/// are returned with usable = false.
GValue g_function(double psi, double psi_err, double beta);

/// Weighted straight line G = intercept + slope (ln beta - x0) for one g.
struct SlopeFit {
  double g = 0.0;
  double alpha = 0.0;
  int n_points = 0;  // usable points
  bool usable = false;
  std::string reason;
  double x0 = 0.0;
  double slope = 0.0;
  double slope_err = 0.0;
  double level = 0.0;  // G at ln beta = x0
  double level_err = 0.0;
  double chi2 = 0.0;
};

struct Beta0Fit {
  double ln_beta0 = 0.0;
  double ln_beta0_err = 0.0;
  double beta0 = 0.0;
  double beta0_err = 0.0;
  double psi_c = 1.0;
  double psi_c_err = 0.0;
  bool free_psi_c = false;
  double chi2 = 0.0;
  int dof = 0;
  double reduced_chi2 = 0.0;
  double p_value = 1.0;
  int iterations = 0;
  std::vector<double> residuals;  // (data - model) / error
};

/// Least squares for beta0 in Psi(beta) = Psi_c (1 + 1 / (2 (ln beta - ln beta0)))
/// with Psi_c = 1, or Psi_c free when free_psi_c is set (diagnostic only).
/// Throws FitError on non-convergence, on an invalid model (ln beta <= ln beta0
/// for some point), or when the chi^2 p-value is below 1e-6.
Beta0Fit fit_beta0(const std::vector<PsiPoint>& points, bool free_psi_c = false);

struct CriticalFit {
  double g_c = 0.0;
  double g_c_err = 0.0;
  double alpha_c = 0.0;
  double alpha_c_err = 0.0;
  double ln_beta0 = 0.0;
  double ln_beta0_err = 0.0;
  double beta0 = 0.0;
  double beta0_err = 0.0;
  double psi_c = 1.0;
  double psi_c_err = 0.0;
  std::string psi_c_note;
  std::vector<PsiPoint> at_critical;  // Psi interpolated to g_c, one per beta
  std::vector<SlopeFit> slopes;  // one per g, ascending
  std::size_t bracket_lo = 0;    // index into slopes of the bracketing pair
  int bootstrap_ok = 0;
  int bootstrap_failed = 0;
};

struct CriticalOptions {
  int min_betas = 3;
  int min_groups = 4;
  int bootstrap = 1000;
  std::uint64_t seed = 12345;
};

/// Locate the coupling where G stops depending on beta: fit G against ln beta
/// for every g, interpolate the zero of the slope between the bracketing pair
/// of g values, and read ln beta0 = -G/2 there. Uncertainties come from a
/// parametric bootstrap over the Psi errors. Throws FitError on insufficient
/// coverage or when no slope sign change is found.
CriticalFit find_critical(const std::vector<PsiPoint>& points, const CriticalOptions& opt = {});

/// g_c = omega0 sqrt((alpha_c - alpha_q) / (4 alpha_cav)). Throws
/// NoSolutionError when alpha_q >= alpha_c and DomainError for alpha_cav <= 0.
double gc_from_alpha_c(const ModelParams& p, double alpha_c);

}  // namespace drabi
