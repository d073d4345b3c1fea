#pragma once

#include <cstddef>
#include <vector>

namespace drabi {

/// Piecewise-constant sigma_z(tau) on the circle [0, beta): base_sign is the
/// value just after tau = 0 and the sign flips at every kink.
struct Worldline {
  double beta = 1.0;
  int base_sign = +1;
  std::vector<double> kinks;  // strictly increasing, in [0, beta)

  std::size_t n_kinks() const { return kinks.size(); }

  /// sigma_z just after tau.
  int sign_at(double tau) const;

  /// (1 / beta) int sigma_z d tau.
  double magnetization() const;

  /// Even kink count, sorted, in range, base_sign = +-1.
  bool valid() const;
};

Worldline init_worldline(double beta);

/// One constant-sign piece of the circle. Segments are listed on the line
/// [b_last - beta, b_last): the first one wraps through tau = 0 and may start
/// at a negative time, so any two segments i < j satisfy end_j - start_i <= beta.
struct Segment {
  double start;
  double end;
  int sign;
};

/// Segments delimited by the union of kinks and `cuts` (sorted, in [0, beta)).
/// With no boundary at all the whole circle is one segment [0, beta).
/// Segment i + 1 starts at boundary i of the merged sorted list.
std::vector<Segment> segments_with_cuts(const Worldline& wl, const std::vector<double>& cuts);

/// Rebuild a worldline from a segment list produced by segments_with_cuts
/// after its signs were changed; boundaries between equal signs disappear.
Worldline worldline_from_segments(double beta, const std::vector<Segment>& segs);

}  // namespace drabi
