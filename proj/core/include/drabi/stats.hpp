#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace drabi {

class Rng;

/// Post-processed Monte Carlo observable.
struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double tau_int = 0.5;  // integrated autocorrelation time, in sweeps
  std::uint64_t n_samples = 0;
  std::uint64_t n_therm = 0;
  bool bin_warning = false;  // bins shorter than 20 tau_int
};

/// Streaming autocorrelation estimator up to a fixed maximum lag. Values are
/// shifted by the first sample to limit cancellation in the covariances.
class AutocorrAccumulator {
 public:
  explicit AutocorrAccumulator(std::size_t max_lag = 512);

  void add(double x);

  std::uint64_t count() const { return count_; }
  std::size_t max_lag() const { return max_lag_; }

  /// Normalized autocorrelation rho(lag) for lag <= max_lag.
  std::vector<double> rho() const;

  /// Windowed sum tau = 1/2 + sum_{t=1}^{W} rho(t), with W the smallest
  /// window satisfying W >= c tau(W). Returns 0.5 for uncorrelated or
  /// constant series.
  double tau_int(double c = 6.0) const;

  void write(std::ostream& os) const;
  static AutocorrAccumulator read(std::istream& is);

  bool operator==(const AutocorrAccumulator&) const = default;

 private:
  std::size_t max_lag_;
  std::uint64_t count_ = 0;
  double shift_ = 0.0;
  double sum_ = 0.0;
  std::vector<double> lag_sums_;  // sum over t of y_t y_{t-l}
  std::vector<double> ring_;      // last max_lag + 1 shifted values
  std::vector<double> first_;     // first max_lag shifted values
};

double sample_mean(std::span<const double> xs);

/// Standard error of the mean of equal-weight bins (the jackknife error of the mean).
double standard_error(std::span<const double> bins);

/// Jackknife error of a function of several jointly binned series.
double jackknife_error(const std::vector<std::span<const double>>& series,
                       const std::function<double(std::span<const double>)>& fn);

/// Bootstrap standard deviation of fn(resampled means) over jointly resampled bins.
double bootstrap_error(const std::vector<std::span<const double>>& series,
                       const std::function<double(std::span<const double>)>& fn, Rng& rng,
                       int resamples);

/// Weighted linear regression y = a + b x with weights 1/sigma^2.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_err = 0.0;
  double slope_err = 0.0;
  double cov = 0.0;
  double chi2 = 0.0;
  int dof = 0;
};

LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> sigma);

}  // namespace drabi
