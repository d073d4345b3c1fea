#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "drabi/bkt.hpp"
#include "drabi/error.hpp"
#include "drabi/rng.hpp"

using namespace drabi;

namespace {

MCEstimate m2_estimate(double mean, double err) {
  MCEstimate e;
  e.mean = mean;
  e.std_error = err;
  return e;
}

double psi_model(double beta, double ln_beta0, double psi_c = 1.0) {
  return psi_c * (1.0 + 0.5 / (std::log(beta) - ln_beta0));
}

const std::vector<double> kBetas{25, 50, 100, 200, 400};

// G(alpha, ln beta) = -2 ln beta0 + c (alpha_c - alpha)(ln beta - x0), turned into Psi.
std::vector<PsiPoint> synthetic_scan(double alpha_c, double ln_beta0, double c, double noise, Rng& r) {
  double x0 = 0.0;
  for (double b : kBetas) x0 += std::log(b);
  x0 /= static_cast<double>(kBetas.size());
  std::vector<PsiPoint> pts;
  for (int k = 0; k < 9; ++k) {
    const double alpha = 0.98 + 0.02 * k;
    for (double b : kBetas) {
      const double G = -2.0 * ln_beta0 + c * (alpha_c - alpha) * (std::log(b) - x0);
      const double psi = 1.0 + 1.0 / (G + 2.0 * std::log(b));
      const double err = noise * psi;
      pts.push_back(PsiPoint{alpha, alpha, b, psi + err * r.normal(), err});
    }
  }
  return pts;
}

}  // namespace

TEST(Bkt, PsiScalesM2) {
  const auto p = psi(1.05, m2_estimate(0.98, 0.01));
  EXPECT_DOUBLE_EQ(p.value, 1.05 * 0.98);
  EXPECT_DOUBLE_EQ(p.error, 1.05 * 0.01);
  EXPECT_THROW(psi(1.0, m2_estimate(1.2, 0.01)), DomainError);
  EXPECT_THROW(psi(1.0, m2_estimate(-0.1, 0.01)), DomainError);
  const auto pt = make_psi_point(0.86, 1.05, 100.0, m2_estimate(0.99, 0.001));
  EXPECT_EQ(pt.g, 0.86);
  EXPECT_EQ(pt.beta, 100.0);
}

TEST(Bkt, GFunction) {
  const auto g = g_function(1.1, 0.001, 100.0);
  EXPECT_NEAR(g.value, 10.0 - 2.0 * std::log(100.0), 1e-12);
  EXPECT_NEAR(g.error, 0.1, 1e-12);
  EXPECT_TRUE(g.usable);
  const auto close = g_function(1.002, 0.001, 100.0);
  EXPECT_FALSE(close.usable);
  EXPECT_FALSE(close.reason.empty());
  EXPECT_FALSE(g_function(0.9, 0.001, 100.0).usable);
  EXPECT_THROW(g_function(1.0, 0.001, 100.0), DomainError);
}

TEST(Bkt, GIsConstantAlongCriticalPsi) {
  for (double b : kBetas) EXPECT_NEAR(g_function(psi_model(b, 1.3), 0.0, b).value, -2.6, 1e-10);
}

TEST(Bkt, FitBeta0RecoversExactData) {
  std::vector<PsiPoint> pts;
  for (double b : kBetas) pts.push_back(PsiPoint{0.0, 1.0, b, psi_model(b, 0.7), 1e-3});
  const auto f = fit_beta0(pts);
  EXPECT_NEAR(f.ln_beta0, 0.7, 1e-9);
  EXPECT_NEAR(f.beta0, std::exp(0.7), 1e-8);
  EXPECT_NEAR(f.chi2, 0.0, 1e-12);
  EXPECT_EQ(f.dof, 4);
  EXPECT_GT(f.ln_beta0_err, 0.0);
  const auto ff = fit_beta0(pts, true);
  EXPECT_NEAR(ff.psi_c, 1.0, 1e-9);
  EXPECT_NEAR(ff.ln_beta0, 0.7, 1e-7);
  EXPECT_EQ(ff.dof, 3);
}

TEST(Bkt, FitBeta0WithNoiseIsWithinErrors) {
  Rng r(31);
  int inside = 0;
  const int trials = 40;
  for (int t = 0; t < trials; ++t) {
    std::vector<PsiPoint> pts;
    for (double b : kBetas) {
      const double v = psi_model(b, 0.5);
      pts.push_back(PsiPoint{0.0, 1.0, b, v + 0.01 * v * r.normal(), 0.01 * v});
    }
    const auto f = fit_beta0(pts);
    if (std::abs(f.ln_beta0 - 0.5) < 2.0 * f.ln_beta0_err) ++inside;
  }
  // Two-sigma coverage is 95 percent.
  EXPECT_GE(inside, 32);
}

TEST(Bkt, FitBeta0RejectsFlatPsi) {
  std::vector<PsiPoint> pts;
  for (double b : kBetas) pts.push_back(PsiPoint{0.0, 1.0, b, 1.3, 1e-4});
  EXPECT_THROW(fit_beta0(pts), FitError);
  EXPECT_THROW(fit_beta0({PsiPoint{0.0, 1.0, 10.0, 1.2, 0.01}}), FitError);
}

TEST(Bkt, FindCriticalRecoversSyntheticTransition) {
  Rng r(77);
  const auto pts = synthetic_scan(1.05, 1.0, 20.0, 0.005, r);
  CriticalOptions opt;
  opt.bootstrap = 400;
  const auto f = find_critical(pts, opt);
  EXPECT_NEAR(f.alpha_c, 1.05, std::max(3.0 * f.alpha_c_err, 0.005));
  EXPECT_EQ(f.g_c, f.alpha_c);
  EXPECT_NEAR(f.ln_beta0, 1.0, std::max(3.0 * f.ln_beta0_err, 0.05));
  EXPECT_GT(f.alpha_c_err, 0.0);
  EXPECT_LT(f.alpha_c_err, 0.02);
  EXPECT_EQ(f.slopes.size(), 9u);
  EXPECT_GT(f.bootstrap_ok, 300);
  EXPECT_EQ(f.at_critical.size(), kBetas.size());
  EXPECT_NEAR(f.psi_c, 1.0, 0.05);
  for (std::size_t k = 0; k <= f.bracket_lo; ++k)
    if (f.slopes[k].usable) EXPECT_GT(f.slopes[k].slope, 0.0);
}

TEST(Bkt, FindCriticalIsExactWithoutNoise) {
  Rng r(1);
  const auto pts = synthetic_scan(1.07, 0.8, 15.0, 0.0, r);
  std::vector<PsiPoint> with_err = pts;
  for (auto& p : with_err) p.psi_err = 1e-6;
  CriticalOptions opt;
  opt.bootstrap = 20;
  const auto f = find_critical(with_err, opt);
  EXPECT_NEAR(f.alpha_c, 1.07, 1e-9);
  EXPECT_NEAR(f.ln_beta0, 0.8, 1e-9);
}

TEST(Bkt, FindCriticalCoverageErrors) {
  Rng r(2);
  auto pts = synthetic_scan(1.05, 1.0, 20.0, 0.0, r);
  for (auto& p : pts) p.psi_err = 1e-4;
  std::vector<PsiPoint> few_groups(pts.begin(), pts.begin() + 15);
  EXPECT_THROW(find_critical(few_groups), FitError);
  std::vector<PsiPoint> few_betas;
  for (const auto& p : pts)
    if (p.beta <= 50) few_betas.push_back(p);
  EXPECT_THROW(find_critical(few_betas), FitError);
}

TEST(Bkt, FindCriticalWithoutSignChangeListsSlopes) {
  Rng r(3);
  // Transition far above the scanned range: every slope is positive.
  auto pts = synthetic_scan(1.5, 1.0, 5.0, 0.0, r);
  for (auto& p : pts) p.psi_err = 1e-4;
  try {
    find_critical(pts);
    FAIL() << "expected FitError";
  } catch (const FitError& e) {
    EXPECT_NE(std::string(e.what()).find("g=0.98"), std::string::npos) << e.what();
  }
}

TEST(Bkt, CriticalCouplingFromAlpha) {
  ModelParams p;
  p.omega0 = 0.75;
  p.alpha_cav = 0.2;
  EXPECT_NEAR(gc_from_alpha_c(p, 1.05), 0.859233, 1e-6);
  p.alpha_q = 0.525;
  EXPECT_NEAR(gc_from_alpha_c(p, 1.05), 0.607569, 1e-6);
  double last = 0.0;
  for (double a : {0.6, 0.8, 1.0, 1.2}) {
    const double g = gc_from_alpha_c(p, a);
    EXPECT_GT(g, last);
    // Inverse relation: alpha_eff(g_c) + alpha_q = alpha_c.
    EXPECT_NEAR(4.0 * g * g * p.alpha_cav / (p.omega0 * p.omega0) + p.alpha_q, a, 1e-12);
    last = g;
  }
  EXPECT_THROW(gc_from_alpha_c(p, 0.5), NoSolutionError);
  p.alpha_cav = 0.0;
  EXPECT_THROW(gc_from_alpha_c(p, 1.05), DomainError);
}
