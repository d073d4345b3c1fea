#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "drabi/spectral.hpp"

namespace drabi {

struct KernelGridSpec {
  double tau_min = 1e-4;        // first non-zero node is at most this
  int points_per_octave = 128;  // uniform nodes inside each octave [2^e, 2^(e+1)) tau_min
  double quad_rel_tol = 1e-11;  // per-node frequency quadrature
  double target_tol = 1e-7;     // certification threshold for interpolation
};

/// Tabulated K(tau) and W(tau) on [0, beta/2], extended to [0, beta] by the
/// symmetry K(tau) = K(beta - tau). Nodes are 0 followed by an octave grid
/// (uniform within each octave, geometric across octaves), so the cell index
/// of any tau is found with frexp instead of a search.
///
/// W is interpolated with quintic Hermite polynomials from (W, W' = F, W'' = K)
/// and K with cubic Hermite polynomials from (K, K').
class KernelTable {
 public:
  KernelTable() = default;

  static KernelTable build(const SpectralDensity& sd, double beta, const KernelGridSpec& spec = {});

  double beta() const { return beta_; }
  double tol() const { return tol_; }
  bool zero() const { return zero_; }
  std::size_t size() const { return tau_.size(); }
  const std::vector<double>& tau_grid() const { return tau_; }
  const std::vector<double>& k_values() const { return k_; }
  const std::vector<double>& w_values() const { return w_; }
  const std::string& source() const { return source_; }
  const KernelGridSpec& spec() const { return spec_; }

  /// Interpolated K on [0, beta]; DomainError outside.
  double K(double tau) const;
  /// Interpolated W on [0, beta]; DomainError outside.
  double W(double tau) const;
  /// F = W' on [0, beta].
  double F(double tau) const;

  /// W on [0, beta] without the range check; caller guarantees the range.
  double w_unchecked(double tau) const {
    if (tau <= half_) return w_half(tau);
    return w_half(beta_ - tau) + total_ * (tau - half_);
  }

  /// int_a^b int_c^d K(t - s) dt ds for a <= b <= c <= d with d - a <= beta.
  double pair_integral(double a, double b, double c, double d) const {
    return w_unchecked(d - a) - w_unchecked(c - a) - w_unchecked(d - b) + w_unchecked(c - b);
  }

  /// Integral of K over a full period, F(beta).
  double total() const { return total_; }

  /// Versioned columnar text: comment header echoing the source and tolerance,
  /// then columns tau K W F dK at 17 significant digits.
  void write(std::ostream& os) const;
  static KernelTable read(std::istream& is);

 private:
  std::size_t cell(double tau) const;
  double w_half(double tau) const;
  double f_half(double tau) const;
  double k_half(double tau) const;
  void finish_grid();

  double beta_ = 0.0;
  double half_ = 0.0;
  double tau0_ = 0.0;  // first non-zero node
  int ppo_ = 0;
  int octaves_ = 0;
  double total_ = 0.0;
  double tol_ = 0.0;
  bool zero_ = true;
  std::string source_;
  KernelGridSpec spec_{};
  std::vector<double> tau_, k_, dk_, f_, w_;
};

}  // namespace drabi
