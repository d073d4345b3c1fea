#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "drabi/rng.hpp"
#include "drabi/stats.hpp"

using namespace drabi;

namespace {

std::vector<double> ar1(double rho, int n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<double> x(n);
  double v = 0.0;
  for (int i = 0; i < n; ++i) {
    v = rho * v + std::sqrt(1 - rho * rho) * r.normal();
    x[i] = v;
  }
  return x;
}

}  // namespace

TEST(Autocorr, WhiteNoise) {
  AutocorrAccumulator a(64);
  for (double x : ar1(0.0, 100000, 1)) a.add(x);
  EXPECT_NEAR(a.tau_int(), 0.5, 0.05);
}

TEST(Autocorr, AR1MatchesClosedForm) {
  // tau_int = (1 + rho) / (2 (1 - rho)) for an AR(1) process.
  for (double rho : {0.5, 0.8, 0.9}) {
    AutocorrAccumulator a(512);
    for (double x : ar1(rho, 400000, 2)) a.add(x);
    const double exact = (1 + rho) / (2 * (1 - rho));
    EXPECT_NEAR(a.tau_int(), exact, 0.08 * exact) << rho;
    const auto r = a.rho();
    EXPECT_NEAR(r[1], rho, 0.02);
  }
}

TEST(Autocorr, ConstantSeries) {
  AutocorrAccumulator a(16);
  for (int i = 0; i < 100; ++i) a.add(0.3);
  EXPECT_EQ(a.tau_int(), 0.5);
}

TEST(Autocorr, SerializationContinues) {
  const auto x = ar1(0.7, 5000, 3);
  AutocorrAccumulator a(32), b(32);
  for (int i = 0; i < 2500; ++i) a.add(x[i]);
  std::stringstream ss;
  a.write(ss);
  b = AutocorrAccumulator::read(ss);
  EXPECT_TRUE(a == b);
  for (int i = 2500; i < 5000; ++i) {
    a.add(x[i]);
    b.add(x[i]);
  }
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.tau_int(), b.tau_int());
}

TEST(Binning, StandardErrorOfMean) {
  const std::vector<double> bins{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(sample_mean(bins), 2.5);
  // sample sd = sqrt(5/3), divided by sqrt(4).
  EXPECT_NEAR(standard_error(bins), std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(standard_error(std::vector<double>{1.0}), 0.0);
}

TEST(Binning, JackknifeOfMeanEqualsStandardError) {
  const auto x = ar1(0.0, 200, 4);
  const double jk = jackknife_error({x}, [](std::span<const double> m) { return m[0]; });
  EXPECT_NEAR(jk, standard_error(x), 1e-12);
}

TEST(Binning, BootstrapOfMeanApproximatesStandardError) {
  const auto x = ar1(0.0, 400, 5);
  Rng r(9);
  const double bs = bootstrap_error({x}, [](std::span<const double> m) { return m[0]; }, r, 4000);
  EXPECT_NEAR(bs / standard_error(x), 1.0, 0.06);
}

TEST(Binning, BootstrapOfRatio) {
  // Ratio of two independent means: delta-method error as reference.
  Rng g(6);
  std::vector<double> a(500), b(500);
  for (int i = 0; i < 500; ++i) {
    a[i] = 2.0 + 0.1 * g.normal();
    b[i] = 4.0 + 0.2 * g.normal();
  }
  Rng r(10);
  const double bs = bootstrap_error({a, b}, [](std::span<const double> m) { return m[0] / m[1]; }, r, 4000);
  const double ma = sample_mean(a), mb = sample_mean(b);
  const double delta = (ma / mb) * std::hypot(standard_error(a) / ma, standard_error(b) / mb);
  EXPECT_NEAR(bs / delta, 1.0, 0.08);
}

TEST(LinearFit, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7}, s{0.1, 0.1, 0.2, 0.1};
  const auto f = weighted_linear_fit(x, y, s);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.chi2, 0.0, 1e-18);
  EXPECT_EQ(f.dof, 2);
  EXPECT_GT(f.slope_err, 0.0);
}

TEST(LinearFit, ErrorsMatchMonteCarloScatter) {
  const std::vector<double> x{3.2, 3.9, 4.6, 5.3, 6.0};
  const std::vector<double> s{0.3, 0.2, 0.25, 0.4, 0.5};
  Rng r(12);
  double sum = 0, sum2 = 0, reported = 0;
  const int n = 4000;
  for (int k = 0; k < n; ++k) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 - 0.5 * x[i] + s[i] * r.normal();
    const auto f = weighted_linear_fit(x, y, s);
    sum += f.slope;
    sum2 += f.slope * f.slope;
    reported = f.slope_err;
  }
  const double mean = sum / n, sd = std::sqrt(sum2 / n - mean * mean);
  EXPECT_NEAR(mean, -0.5, 4 * sd / std::sqrt(n));
  EXPECT_NEAR(sd / reported, 1.0, 0.05);
}
