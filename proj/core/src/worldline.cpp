#include "drabi/worldline.hpp"

#include <algorithm>
#include <cmath>

namespace drabi {

int Worldline::sign_at(double tau) const {
  // Kinks at exactly tau = 0 are absorbed into base_sign.
  const auto first = std::upper_bound(kinks.begin(), kinks.end(), 0.0);
  const auto last = std::upper_bound(kinks.begin(), kinks.end(), tau);
  const auto flips = last > first ? last - first : 0;
  return (flips % 2 == 0) ? base_sign : -base_sign;
}

double Worldline::magnetization() const {
  if (kinks.empty()) return static_cast<double>(base_sign);
  double sum = 0.0;
  int s = base_sign;
  double prev = 0.0;
  for (double k : kinks) {
    if (k > 0.0) {
      sum += s * (k - prev);
      s = -s;
      prev = k;
    }
  }
  sum += s * (beta - prev);
  return sum / beta;
}

bool Worldline::valid() const {
  if (base_sign != 1 && base_sign != -1) return false;
  if (kinks.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < kinks.size(); ++i) {
    if (!(kinks[i] >= 0.0 && kinks[i] < beta)) return false;
    if (i > 0 && !(kinks[i] > kinks[i - 1])) return false;
  }
  return true;
}

Worldline init_worldline(double beta) {
  Worldline wl;
  wl.beta = beta;
  wl.base_sign = +1;
  return wl;
}

std::vector<Segment> segments_with_cuts(const Worldline& wl, const std::vector<double>& cuts) {
  const double beta = wl.beta;
  // Merge kinks and cuts, remembering which boundaries flip the sign.
  std::vector<std::pair<double, bool>> bounds;
  bounds.reserve(wl.kinks.size() + cuts.size());
  std::size_t i = 0, j = 0;
  while (i < wl.kinks.size() || j < cuts.size()) {
    if (j == cuts.size() || (i < wl.kinks.size() && wl.kinks[i] <= cuts[j])) {
      bounds.emplace_back(wl.kinks[i++], true);
    } else {
      bounds.emplace_back(cuts[j++], false);
    }
  }

  std::vector<Segment> segs;
  if (bounds.empty()) {
    segs.push_back({0.0, beta, wl.base_sign});
    return segs;
  }
  const std::size_t k = bounds.size();
  segs.resize(k);
  int s = wl.base_sign;
  for (std::size_t b = 0; b < k; ++b) {
    const auto [t, flips] = bounds[b];
    if (flips && t > 0.0) s = -s;
    // boundary b opens segment b + 1 (segment k wraps to index 0)
    const std::size_t idx = (b + 1) % k;
    segs[idx].start = (idx == 0) ? t - beta : t;
    segs[idx].sign = s;
  }
  for (std::size_t b = 0; b < k; ++b) segs[b].end = bounds[b].first;
  return segs;
}

Worldline worldline_from_segments(double beta, const std::vector<Segment>& segs) {
  Worldline wl;
  wl.beta = beta;
  const std::size_t k = segs.size();
  if (k == 1) {
    wl.base_sign = segs[0].sign;
    return wl;
  }
  // Boundary between segment b (before) and b + 1 (after) sits at segs[b].end.
  for (std::size_t b = 0; b < k; ++b) {
    const Segment& before = segs[b];
    const Segment& after = segs[(b + 1) % k];
    if (before.sign != after.sign) wl.kinks.push_back(before.end);
  }
  // segs[0] ends at the smallest boundary, so kinks are already sorted.
  const double first_boundary = segs[0].end;
  if (first_boundary > 0.0) {
    wl.base_sign = segs[0].sign;
  } else {
    wl.base_sign = segs[1].sign;
  }
  return wl;
}

}  // namespace drabi
