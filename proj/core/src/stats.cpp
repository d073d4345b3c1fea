#include "drabi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>

#include "drabi/error.hpp"
#include "drabi/rng.hpp"

namespace drabi {

AutocorrAccumulator::AutocorrAccumulator(std::size_t max_lag)
    : max_lag_(max_lag), lag_sums_(max_lag + 1, 0.0), ring_(max_lag + 1, 0.0) {}

void AutocorrAccumulator::add(double x) {
  if (count_ == 0) shift_ = x;
  const double y = x - shift_;
  const std::size_t n = ring_.size();
  const std::size_t pos = static_cast<std::size_t>(count_ % n);
  ring_[pos] = y;
  const std::size_t lags = static_cast<std::size_t>(std::min<std::uint64_t>(count_, max_lag_));
  for (std::size_t l = 0; l <= lags; ++l) lag_sums_[l] += y * ring_[(pos + n - l) % n];
  if (first_.size() < max_lag_) first_.push_back(y);
  sum_ += y;
  ++count_;
}

std::vector<double> AutocorrAccumulator::rho() const {
  std::vector<double> out;
  if (count_ < 2) return out;
  const double n = static_cast<double>(count_);
  const double mean = sum_ / n;
  const std::size_t lags = static_cast<std::size_t>(std::min<std::uint64_t>(count_ - 1, max_lag_));
  const std::size_t rn = ring_.size();
  const std::size_t last = static_cast<std::size_t>((count_ - 1) % rn);

  double head = 0.0;  // sum of the first l values
  double tail = 0.0;  // sum of the last l values
  std::vector<double> cov(lags + 1, 0.0);
  for (std::size_t l = 0; l <= lags; ++l) {
    if (l > 0) {
      head += first_[l - 1];
      tail += ring_[(last + rn - (l - 1)) % rn];
    }
    const double m = n - static_cast<double>(l);
    const double s_late = sum_ - head;  // sum_{t >= l} y_t
    const double s_early = sum_ - tail; // sum_{t < n - l} y_t
    cov[l] = (lag_sums_[l] - mean * (s_late + s_early) + m * mean * mean) / m;
  }
  if (!(cov[0] > 0.0)) return out;
  out.resize(lags + 1);
  for (std::size_t l = 0; l <= lags; ++l) out[l] = cov[l] / cov[0];
  return out;
}

double AutocorrAccumulator::tau_int(double c) const {
  const auto r = rho();
  if (r.size() < 2) return 0.5;
  double tau = 0.5;
  for (std::size_t w = 1; w < r.size(); ++w) {
    tau += r[w];
    if (static_cast<double>(w) >= c * tau) break;
  }
  return std::max(tau, 0.5);
}

void AutocorrAccumulator::write(std::ostream& os) const {
  os << std::setprecision(17);
  os << max_lag_ << ' ' << count_ << ' ' << shift_ << ' ' << sum_ << '\n';
  for (double v : lag_sums_) os << v << ' ';
  os << '\n';
  for (double v : ring_) os << v << ' ';
  os << '\n' << first_.size();
  for (double v : first_) os << ' ' << v;
  os << '\n';
}

AutocorrAccumulator AutocorrAccumulator::read(std::istream& is) {
  std::size_t max_lag = 0;
  std::uint64_t count = 0;
  double shift = 0.0, sum = 0.0;
  if (!(is >> max_lag >> count >> shift >> sum)) throw ParseError("autocorrelation state: bad header");
  AutocorrAccumulator a(max_lag);
  a.count_ = count;
  a.shift_ = shift;
  a.sum_ = sum;
  for (auto& v : a.lag_sums_)
    if (!(is >> v)) throw ParseError("autocorrelation state: truncated lag sums");
  for (auto& v : a.ring_)
    if (!(is >> v)) throw ParseError("autocorrelation state: truncated ring");
  std::size_t nf = 0;
  if (!(is >> nf) || nf > max_lag) throw ParseError("autocorrelation state: bad prefix length");
  a.first_.resize(nf);
  for (auto& v : a.first_)
    if (!(is >> v)) throw ParseError("autocorrelation state: truncated prefix");
  return a;
}

double sample_mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double standard_error(std::span<const double> bins) {
  const std::size_t n = bins.size();
  if (n < 2) return 0.0;
  const double m = sample_mean(bins);
  double ss = 0.0;
  for (double x : bins) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(n) * static_cast<double>(n - 1)));
}

double jackknife_error(const std::vector<std::span<const double>>& series,
                       const std::function<double(std::span<const double>)>& fn) {
  if (series.empty()) return 0.0;
  const std::size_t nb = series.front().size();
  for (const auto& s : series)
    if (s.size() != nb) throw DomainError("jackknife: series of unequal length");
  if (nb < 2) return 0.0;
  std::vector<double> totals(series.size(), 0.0);
  for (std::size_t k = 0; k < series.size(); ++k)
    for (double x : series[k]) totals[k] += x;
  std::vector<double> args(series.size());
  std::vector<double> reps(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    for (std::size_t k = 0; k < series.size(); ++k)
      args[k] = (totals[k] - series[k][i]) / static_cast<double>(nb - 1);
    reps[i] = fn(args);
  }
  const double m = sample_mean(reps);
  double ss = 0.0;
  for (double r : reps) ss += (r - m) * (r - m);
  return std::sqrt(ss * static_cast<double>(nb - 1) / static_cast<double>(nb));
}

double bootstrap_error(const std::vector<std::span<const double>>& series,
                       const std::function<double(std::span<const double>)>& fn, Rng& rng,
                       int resamples) {
  if (series.empty() || resamples < 2) return 0.0;
  const std::size_t nb = series.front().size();
  if (nb < 2) return 0.0;
  std::vector<double> args(series.size());
  std::vector<double> reps;
  reps.reserve(resamples);
  for (int r = 0; r < resamples; ++r) {
    std::fill(args.begin(), args.end(), 0.0);
    for (std::size_t i = 0; i < nb; ++i) {
      const std::size_t pick = static_cast<std::size_t>(rng.below(nb));
      for (std::size_t k = 0; k < series.size(); ++k) args[k] += series[k][pick];
    }
    for (auto& a : args) a /= static_cast<double>(nb);
    const double v = fn(args);
    if (std::isfinite(v)) reps.push_back(v);
  }
  if (reps.size() < 2) return 0.0;
  const double m = sample_mean(reps);
  double ss = 0.0;
  for (double v : reps) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(reps.size() - 1));
}

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> sigma) {
  const std::size_t n = x.size();
  if (y.size() != n || sigma.size() != n) throw DomainError("linear fit: size mismatch");
  if (n < 2) throw FitError("linear fit needs at least two points");
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sigma[i] > 0.0)) throw DomainError("linear fit: sigma must be > 0");
    const double w = 1.0 / (sigma[i] * sigma[i]);
    s += w;
    sx += w * x[i];
    sy += w * y[i];
    sxx += w * x[i] * x[i];
    sxy += w * x[i] * y[i];
  }
  const double det = s * sxx - sx * sx;
  if (!(det > 0.0)) throw FitError("linear fit: degenerate abscissae");
  LinearFit f;
  f.intercept = (sxx * sy - sx * sxy) / det;
  f.slope = (s * sxy - sx * sy) / det;
  f.intercept_err = std::sqrt(sxx / det);
  f.slope_err = std::sqrt(s / det);
  f.cov = -sx / det;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (y[i] - f.intercept - f.slope * x[i]) / sigma[i];
    f.chi2 += r * r;
  }
  f.dof = static_cast<int>(n) - 2;
  return f;
}

}  // namespace drabi
