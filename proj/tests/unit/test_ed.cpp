#include <cmath>
#include <complex>
#include <sstream>

#include <gtest/gtest.h>

#include "drabi/ed.hpp"
#include "drabi/error.hpp"
#include "drabi/rng.hpp"

using namespace drabi;
using cplx = std::complex<double>;

namespace {

DiscretizedBath two_modes(double l1 = 0.3, double l2 = 0.5) {
  return DiscretizedBath{{{0.8, l1}, {2.5, l2}}, "test"};
}

double field_magnetization(double delta, const DiscretizedBath& bath, const FockSpec& spec, double h,
                           double beta) {
  const auto s = diagonalize(delta, bath, spec, h);
  double z = 0.0, m = 0.0;
  for (Eigen::Index k = 0; k < s.energies.size(); ++k) {
    const double w = std::exp(-beta * (s.energies(k) - s.energies(0)));
    z += w;
    m += w * s.sz(k, k);
  }
  return m / z;
}

std::vector<cplx> z_grid(double eps) {
  std::vector<cplx> z;
  for (int i = 0; i < 40; ++i) z.emplace_back(-4.0 + 0.2 * i, eps);
  return z;
}

}  // namespace

TEST(Ed, FreeQubitLevels) {
  const DiscretizedBath none{{}, "none"};
  const FockSpec spec{{}};
  EXPECT_EQ(spec.dimension(), 2u);
  const auto s = diagonalize(1.3, none, spec);
  EXPECT_NEAR(s.energies(0), -0.65, 1e-14);
  EXPECT_NEAR(s.energies(1), 0.65, 1e-14);
}

TEST(Ed, UncoupledModeLadder) {
  const DiscretizedBath bath{{{0.7, 0.0}}, "free"};
  const auto s = diagonalize(1.0, bath, FockSpec{{4}});
  // Levels -1/2 + 0.7 n and +1/2 + 0.7 n.
  std::vector<double> expect;
  for (int n = 0; n <= 4; ++n) {
    expect.push_back(-0.5 + 0.7 * n);
    expect.push_back(0.5 + 0.7 * n);
  }
  std::sort(expect.begin(), expect.end());
  ASSERT_EQ(s.energies.size(), 10);
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(s.energies(i), expect[i], 1e-13);
}

TEST(Ed, FrozenSpinPolaronShift) {
  // delta = 0: sigma_z is conserved and each sector is a displaced oscillator.
  const double w = 1.1, l = 0.4;
  const DiscretizedBath bath{{{w, l}}, "one"};
  const auto s = diagonalize(0.0, bath, FockSpec{{40}});
  EXPECT_NEAR(s.energies(0), -l * l / w, 1e-12);
  EXPECT_NEAR(s.energies(1), -l * l / w, 1e-12);
  EXPECT_NEAR(s.energies(2), w - l * l / w, 1e-12);
  const auto o = thermal_observables(s, 0.0, 3.0);
  EXPECT_NEAR(o.m2, 1.0, 1e-12);
  EXPECT_NEAR(o.sigma_x, 0.0, 1e-14);
}

TEST(Ed, FreeSpinThermalValues) {
  const DiscretizedBath bath{{{0.9, 0.0}}, "free"};
  const auto s = diagonalize(1.0, bath, FockSpec{{3}});
  for (double beta : {0.5, 2.0, 10.0}) {
    const auto o = thermal_observables(s, 1.0, beta);
    const double x = 0.5 * beta;
    EXPECT_NEAR(o.m2, std::tanh(x) / x, 1e-12);
    EXPECT_NEAR(o.sigma_x, std::tanh(x), 1e-12);
    EXPECT_NEAR(o.hq, -0.5 * std::tanh(x), 1e-12);
    EXPECT_NEAR(o.delta_eff, 1.0, 1e-10);
  }
}

TEST(Ed, RandomInstanceIdentities) {
  Rng r(2024);
  for (int trial = 0; trial < 4; ++trial) {
    const double delta = 0.5 + r.uniform();
    const DiscretizedBath bath{{{0.4 + 2.0 * r.uniform(), 0.6 * r.uniform()},
                                {0.4 + 2.0 * r.uniform(), 0.6 * r.uniform()}},
                               "random"};
    const FockSpec spec{{7, 6}};
    const double beta = 0.5 + 6.0 * r.uniform();
    const auto s = diagonalize(delta, bath, spec);
    EXPECT_LT(s.completeness_residual(), 1e-10);
    EXPECT_LT(s.hermiticity_residual(), 1e-10);
    const auto o = thermal_observables(s, delta, beta);
    EXPECT_NEAR(o.mori_yy, 2.0 * o.sigma_x / (beta * delta), 1e-10);
    EXPECT_NEAR(o.m2, imaginary_time_m2(s, beta), 1e-9);
    EXPECT_NEAR(o.delta_eff, delta * std::sqrt(o.mori_yy / o.m2), 1e-12);
    EXPECT_LT(verify_sum_rule(s, beta).residual, 1e-10);
    EXPECT_LT(verify_relaxation_identity(s, delta, beta, z_grid(0.05)), 1e-10);
  }
}

TEST(Ed, RelaxationIdentityHoldsForEveryBroadening) {
  const auto s = diagonalize(1.0, two_modes(), FockSpec{{8, 6}});
  for (double eps : {1e-1, 1e-2, 1e-3}) EXPECT_LT(verify_relaxation_identity(s, 1.0, 4.0, z_grid(eps)), 1e-9);
}

TEST(Ed, StaticSusceptibilityMatchesFiniteField) {
  const double delta = 1.0, beta = 3.0, h = 1e-4;
  const auto bath = two_modes();
  const FockSpec spec{{8, 6}};
  const auto s = diagonalize(delta, bath, spec);
  const auto o = thermal_observables(s, delta, beta);
  const double dm = field_magnetization(delta, bath, spec, h, beta) -
                    field_magnetization(delta, bath, spec, -h, beta);
  EXPECT_NEAR(-dm / (2 * h), beta * o.m2, 1e-6 * beta * o.m2);
  const auto chi = susceptibility(s, beta, {cplx(0.3, 0.01)});
  EXPECT_NEAR(-chi.chi0, beta * o.m2, 1e-10 * beta * o.m2);
  EXPECT_NEAR(chi.m2, o.m2, 1e-14);
  EXPECT_THROW(susceptibility(s, beta, {cplx(0.3, 0.0)}), DomainError);
}

TEST(Ed, FreeSpinRelaxesAsCosine) {
  const DiscretizedBath bath{{{1.7, 0.0}}, "free"};
  std::vector<double> t;
  for (int i = 0; i <= 50; ++i) t.push_back(0.2 * i);
  const auto tr = relax_sigma_z(1.0, bath, FockSpec{{2}}, 1e-3, t);
  EXPECT_EQ(tr.sigma_z.front(), 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_NEAR(tr.sigma_z[i], std::cos(t[i]), 1e-6);
  EXPECT_FALSE(tr.nonlinear);
  EXPECT_THROW(relax_sigma_z(1.0, bath, FockSpec{{2}}, 0.0, t), DomainError);
}

TEST(Ed, WeakCouplingRelaxationOscillates) {
  std::vector<double> t;
  for (int i = 0; i <= 200; ++i) t.push_back(0.1 * i);
  const auto tr = relax_sigma_z(1.0, two_modes(0.05, 0.05), FockSpec{{4, 3}}, 1e-3, t);
  int changes = 0;
  for (std::size_t i = 2; i < t.size(); ++i) {
    const double d0 = tr.sigma_z[i - 1] - tr.sigma_z[i - 2];
    const double d1 = tr.sigma_z[i] - tr.sigma_z[i - 1];
    if (d0 * d1 < 0.0) ++changes;
  }
  EXPECT_GE(changes, 2);
}

TEST(Ed, TruncationConvergence) {
  const auto c = check_truncation(1.0, two_modes(0.1, 0.1), FockSpec{{10, 8}}, 2.0);
  EXPECT_TRUE(c.converged) << c.reason;
  EXPECT_LT(c.d_m2, 1e-6);
  const auto bad = check_truncation(1.0, two_modes(1.0, 1.0), FockSpec{{1, 1}}, 2.0);
  EXPECT_FALSE(bad.converged);
  EXPECT_FALSE(bad.reason.empty());
}

TEST(Ed, BudgetIsEnforcedBeforeAllocation) {
  const FockSpec big{{100, 100}};
  EXPECT_EQ(big.dimension(), 2u * 101 * 101);
  EXPECT_THROW(build_hamiltonian(1.0, two_modes(), big), ResourceError);
  EXPECT_THROW(build_hamiltonian(1.0, two_modes(), FockSpec{{3}}), DomainError);
  EXPECT_EQ((FockSpec{{3, 4}}.doubled().n_max), (std::vector<int>{6, 8}));
}

TEST(Ed, NarrowLorentzianCollapsesToOneMode) {
  ModelParams p;
  p.omega0 = 0.75;
  p.g = 0.3;
  p.alpha_cav = 0.005;
  p.omega_c = 10.0;
  const auto b = discretize_bath(SpectralDensity::structured(p), 1);
  ASSERT_EQ(b.modes.size(), 1u);
  EXPECT_NEAR(b.modes[0].omega, 0.75, 0.02);
  EXPECT_NEAR(b.modes[0].coupling * b.modes[0].coupling, 0.09, 0.002);
}

TEST(Ed, DiscretizationConservesWeight) {
  ModelParams p;
  p.g = 0.8;
  const auto sd = SpectralDensity::structured(p);
  double ref = 0.0;
  for (auto scheme : {DiscretizationScheme::equal_weight, DiscretizationScheme::linear}) {
    for (int n : {3, 8}) {
      const auto b = discretize_bath(sd, n, scheme);
      double total = 0.0;
      for (const auto& m : b.modes) {
        EXPECT_GT(m.omega, 0.0);
        EXPECT_LE(m.omega, p.omega_c);
        total += m.coupling * m.coupling;
      }
      if (ref == 0.0) ref = total;
      EXPECT_NEAR(total, ref, 1e-8 * ref);
    }
    EXPECT_EQ(parse_discretization(to_string(scheme)), scheme);
  }
  const auto eq = discretize_bath(sd, 4);
  for (std::size_t i = 1; i < eq.modes.size(); ++i) {
    EXPECT_GT(eq.modes[i].omega, eq.modes[i - 1].omega);
    EXPECT_NEAR(eq.modes[i].coupling, eq.modes[0].coupling, 1e-8);
  }
  p.g = 0.0;
  EXPECT_THROW(discretize_bath(SpectralDensity::structured(p), 3), DomainError);
  EXPECT_THROW(discretize_bath(sd, 0), DomainError);
  EXPECT_THROW(discretize_bath(SpectralDensity::discrete({{1.0, 0.1}}), 2), UnsupportedOperation);
}

TEST(Ed, BathFileRoundTrip) {
  ModelParams p;
  p.g = 0.7;
  const auto b = discretize_bath(SpectralDensity::structured(p), 5);
  std::stringstream ss;
  write_bath(ss, b);
  const auto r = read_bath(ss);
  ASSERT_EQ(r.modes.size(), b.modes.size());
  for (std::size_t i = 0; i < b.modes.size(); ++i) {
    EXPECT_EQ(r.modes[i].omega, b.modes[i].omega);
    EXPECT_EQ(r.modes[i].coupling, b.modes[i].coupling);
  }
  EXPECT_EQ(r.provenance, b.provenance);
  std::stringstream bad("# drabi bath v1\n1.0 0.2\n-1.0 0.1\n");
  EXPECT_THROW(read_bath(bad), ParseError);
}
