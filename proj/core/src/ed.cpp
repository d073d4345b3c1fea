#include "drabi/ed.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "drabi/error.hpp"

namespace drabi {

std::string to_string(DiscretizationScheme s) {
  return s == DiscretizationScheme::equal_weight ? "equal_weight" : "linear";
}

DiscretizationScheme parse_discretization(const std::string& s) {
  if (s == "equal_weight") return DiscretizationScheme::equal_weight;
  if (s == "linear") return DiscretizationScheme::linear;
  throw ParseError("unknown discretization scheme '" + s + "' (equal_weight|linear)");
}

DiscretizedBath discretize_bath(const SpectralDensity& sd, int n_modes, DiscretizationScheme scheme) {
  if (n_modes < 1) throw DomainError("discretize_bath needs n_modes >= 1");
  if (sd.kind() == SpectralKind::discrete) throw UnsupportedOperation("bath is already discrete");
  if (sd.is_zero()) throw DomainError("discretize_bath: spectral density has zero total weight");
  const double wc = sd.cutoff();
  const double total = integrated_density(sd, wc);
  if (!(total > 0.0)) throw DomainError("discretize_bath: spectral density has zero total weight");

  std::vector<double> edges{0.0};
  if (scheme == DiscretizationScheme::linear) {
    for (int i = 1; i < n_modes; ++i) edges.push_back(wc * i / n_modes);
  } else {
    for (int i = 1; i < n_modes; ++i) {
      const double target = total * i / n_modes;
      double lo = edges.back(), hi = wc;
      for (int it = 0; it < 200 && hi - lo > 1e-14 * wc; ++it) {
        const double mid = 0.5 * (lo + hi);
        (integrated_density(sd, mid) < target ? lo : hi) = mid;
      }
      edges.push_back(0.5 * (lo + hi));
    }
  }
  edges.push_back(wc);

  DiscretizedBath bath;
  for (int i = 0; i < n_modes; ++i) {
    const double w0 = density_moment(sd, edges[i], edges[i + 1], 0);
    if (!(w0 > 0.0)) continue;  // empty linear bin
    const double w1 = density_moment(sd, edges[i], edges[i + 1], 1);
    bath.modes.push_back({w1 / w0, std::sqrt(w0)});
  }
  bath.provenance = sd.describe() + "; " + to_string(scheme) + " bins, n_modes=" + std::to_string(n_modes);
  return bath;
}

void write_bath(std::ostream& os, const DiscretizedBath& bath) {
  os << "# drabi bath v1\n";
  os << "# provenance: " << bath.provenance << '\n';
  os << "# columns: omega coupling\n";
  os << std::setprecision(17);
  for (const auto& m : bath.modes) os << m.omega << ' ' << m.coupling << '\n';
}

DiscretizedBath read_bath(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "# drabi bath v1") throw ParseError("bath file: missing version header");
  DiscretizedBath bath;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# provenance: ", 0) == 0) bath.provenance = line.substr(14);
      continue;
    }
    std::istringstream ls(line);
    BathMode m{};
    if (!(ls >> m.omega >> m.coupling)) throw ParseError("bath file: malformed row " + std::to_string(row));
    if (!(m.omega > 0.0)) throw ParseError("bath file: non-positive frequency at row " + std::to_string(row));
    bath.modes.push_back(m);
  }
  return bath;
}

std::size_t FockSpec::dimension() const {
  std::size_t d = 2;
  for (int n : n_max) {
    const auto f = static_cast<std::size_t>(n + 1);
    if (d > std::numeric_limits<std::size_t>::max() / f) return std::numeric_limits<std::size_t>::max();
    d *= f;
  }
  return d;
}

FockSpec FockSpec::doubled() const {
  FockSpec s = *this;
  for (int& n : s.n_max) n *= 2;
  return s;
}

Eigen::MatrixXd build_hamiltonian(double delta, const DiscretizedBath& bath, const FockSpec& spec, double h) {
  if (spec.n_max.size() != bath.modes.size())
    throw DomainError("FockSpec has " + std::to_string(spec.n_max.size()) + " cutoffs for " +
                      std::to_string(bath.modes.size()) + " modes");
  for (int n : spec.n_max)
    if (n < 0) throw DomainError("negative Fock cutoff");
  const std::size_t dim = spec.dimension();
  if (dim > spec.budget)
    throw ResourceError("Hilbert-space dimension " + std::to_string(dim) + " exceeds budget " +
                        std::to_string(spec.budget));

  // Index = qubit + 2 * (n_0 + (N_0 + 1) (n_1 + ...)); qubit 0 is sigma_z = +1.
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  const std::size_t nm = bath.modes.size();
  std::vector<std::size_t> stride(nm);
  std::size_t s = 2;
  for (std::size_t i = 0; i < nm; ++i) {
    stride[i] = s;
    s *= static_cast<std::size_t>(spec.n_max[i] + 1);
  }
  std::vector<int> occ(nm, 0);
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const int q = static_cast<int>(idx % 2);
    std::size_t rest = idx / 2;
    for (std::size_t i = 0; i < nm; ++i) {
      occ[i] = static_cast<int>(rest % static_cast<std::size_t>(spec.n_max[i] + 1));
      rest /= static_cast<std::size_t>(spec.n_max[i] + 1);
    }
    const double sz = q == 0 ? 1.0 : -1.0;
    const auto r = static_cast<Eigen::Index>(idx);
    double diag = h * sz;
    for (std::size_t i = 0; i < nm; ++i) diag += bath.modes[i].omega * occ[i];
    H(r, r) = diag;
    if (q == 0) {
      H(r, r + 1) = -0.5 * delta;
      H(r + 1, r) = -0.5 * delta;
    }
    for (std::size_t i = 0; i < nm; ++i) {
      if (occ[i] < spec.n_max[i]) {
        const auto c = static_cast<Eigen::Index>(idx + stride[i]);
        const double v = sz * bath.modes[i].coupling * std::sqrt(static_cast<double>(occ[i] + 1));
        H(r, c) = v;
        H(c, r) = v;
      }
    }
  }
  return H;
}

namespace {

// U^T P U for a qubit operator P without forming P densely.
Eigen::MatrixXd rotate_qubit(const Eigen::MatrixXd& U, int which) {
  const Eigen::Index n = U.rows();
  Eigen::MatrixXd PU(n, n);
  for (Eigen::Index r = 0; r < n; r += 2) {
    if (which == 0) {
      PU.row(r) = U.row(r);
      PU.row(r + 1) = -U.row(r + 1);
    } else if (which == 1) {
      PU.row(r) = U.row(r + 1);
      PU.row(r + 1) = U.row(r);
    } else {
      PU.row(r) = -U.row(r + 1);
      PU.row(r + 1) = U.row(r);
    }
  }
  return U.transpose() * PU;
}

// Boltzmann weights exp(-beta (E_m - E_0)) and their sum.
std::vector<double> boltzmann(const SpectrumResult& s, double beta, double& z) {
  const Eigen::Index n = s.energies.size();
  std::vector<double> w(static_cast<std::size_t>(n));
  z = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    w[static_cast<std::size_t>(m)] = std::exp(-beta * (s.energies(m) - s.energies(0)));
    z += w[static_cast<std::size_t>(m)];
  }
  return w;
}

// Kubo-Mori kernel f(E_m, E_n) in shifted units, symmetric in (m, n).
double mori_kernel(const SpectrumResult& s, const std::vector<double>& w, double beta, Eigen::Index m,
                   Eigen::Index n) {
  Eigen::Index lo = m, hi = n;
  if (s.energies(hi) < s.energies(lo)) std::swap(lo, hi);
  const double d = s.energies(hi) - s.energies(lo);
  const double wl = w[static_cast<std::size_t>(lo)];
  if (d < s.degeneracy_tol) {
    if (beta * d > 1e-6)
      throw Error("internal: degeneracy tolerance too coarse for the limit branch at this beta");
    return beta * wl;
  }
  return wl * (-std::expm1(-beta * d)) / d;
}

}  // namespace

double SpectrumResult::completeness_residual() const {
  double worst = 0.0;
  for (Eigen::Index n = 0; n < sz.cols(); ++n) worst = std::max(worst, std::abs(sz.col(n).squaredNorm() - 1.0));
  return worst;
}

double SpectrumResult::hermiticity_residual() const {
  return std::max({(sz - sz.transpose()).cwiseAbs().maxCoeff(), (sx - sx.transpose()).cwiseAbs().maxCoeff(),
                   (sy_imag + sy_imag.transpose()).cwiseAbs().maxCoeff()});
}

SpectrumResult diagonalize(double delta, const DiscretizedBath& bath, const FockSpec& spec, double h) {
  const Eigen::MatrixXd H = build_hamiltonian(delta, bath, spec, h);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw NumericalAccuracyError("eigensolver did not converge", 0.0);
  SpectrumResult s;
  s.energies = es.eigenvalues();
  s.vectors = es.eigenvectors();
  s.sz = rotate_qubit(s.vectors, 0);
  s.sx = rotate_qubit(s.vectors, 1);
  s.sy_imag = rotate_qubit(s.vectors, 2);
  s.span = s.energies(s.energies.size() - 1) - s.energies(0);
  s.degeneracy_tol = 1e-12 * std::max(s.span, std::abs(delta));
  return s;
}

double log_partition_shifted(const SpectrumResult& s, double beta) {
  double z = 0.0;
  boltzmann(s, beta, z);
  return std::log(z);
}

double mori_product(const SpectrumResult& s, const Eigen::MatrixXd& abs2, double beta) {
  double z = 0.0;
  const auto w = boltzmann(s, beta, z);
  const Eigen::Index n = s.energies.size();
  double acc = 0.0;
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k) {
      const double a = abs2(m, k);
      if (a != 0.0) acc += a * mori_kernel(s, w, beta, m, k);
    }
  return acc / (beta * z);
}

double imaginary_time_m2(const SpectrumResult& s, double beta) {
  double z = 0.0;
  boltzmann(s, beta, z);
  const Eigen::VectorXd e = s.energies.array() - s.energies(0);
  const Eigen::MatrixXd a2 = s.sz.cwiseAbs2();
  auto corr = [&](double tau) {
    const Eigen::VectorXd left = (-(beta - tau) * e.array()).exp();
    const Eigen::VectorXd right = (-tau * e.array()).exp();
    return left.dot(a2 * right) / z;
  };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(corr, 0.0, beta, 20, 1e-15);
  return integral / beta;
}

ThermalObservables thermal_observables(const SpectrumResult& s, double delta, double beta) {
  if (!(beta > 0.0)) throw DomainError("thermal_observables needs beta > 0");
  ThermalObservables o;
  double z = 0.0;
  const auto w = boltzmann(s, beta, z);
  for (Eigen::Index m = 0; m < s.energies.size(); ++m) {
    const double p = w[static_cast<std::size_t>(m)] / z;
    o.sigma_x += p * s.sx(m, m);
    o.energy += p * s.energies(m);
  }
  o.hq = -0.5 * delta * o.sigma_x;
  o.mori_zz = mori_product(s, s.sz.cwiseAbs2(), beta);
  o.mori_yy = mori_product(s, s.sy_imag.cwiseAbs2(), beta);
  o.m2 = o.mori_zz;
  o.delta_eff = delta * std::sqrt(o.mori_yy / o.mori_zz);
  return o;
}

SusceptibilityResult susceptibility(const SpectrumResult& s, double beta,
                                    const std::vector<std::complex<double>>& z_grid) {
  for (const auto& z : z_grid)
    if (!(z.imag() > 0.0)) throw DomainError("susceptibility needs Im z > 0");
  double zpart = 0.0;
  const auto w = boltzmann(s, beta, zpart);
  const Eigen::Index n = s.energies.size();

  // Collect (omega_nm, weight) for pairs with non-zero weight and omega > 0;
  // the mirror pair (omega -> -omega) carries the same weight with opposite sign.
  std::vector<std::pair<double, double>> poles;
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k) {
      const double om = s.energies(k) - s.energies(m);
      if (om <= s.degeneracy_tol) continue;
      const double a = s.sz(m, k) * s.sz(m, k);
      const double wt = a * (w[static_cast<std::size_t>(m)] - w[static_cast<std::size_t>(k)]) / zpart;
      if (wt != 0.0) poles.emplace_back(om, wt);
    }

  SusceptibilityResult r;
  r.z = z_grid;
  r.m2 = mori_product(s, s.sz.cwiseAbs2(), beta);
  for (const auto& [om, wt] : poles) r.chi0 += -2.0 * wt / om;
  for (const auto& z : z_grid) {
    std::complex<double> chi = 0.0;
    for (const auto& [om, wt] : poles) chi += wt * (1.0 / (z - om) - 1.0 / (z + om));
    r.chi.push_back(chi);
    r.sigma_z.push_back(std::complex<double>(0.0, 1.0) * (chi - r.chi0) / (r.m2 * beta * z));
  }
  return r;
}

std::vector<std::complex<double>> mori_relaxation_y(const SpectrumResult& s, double beta,
                                                    const std::vector<std::complex<double>>& z_grid) {
  double zpart = 0.0;
  const auto w = boltzmann(s, beta, zpart);
  const Eigen::Index n = s.energies.size();
  std::vector<std::pair<double, double>> terms;  // (E_m - E_n, |A|^2 f)
  double norm = 0.0;
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k) {
      const double a = s.sy_imag(m, k) * s.sy_imag(m, k);
      if (a == 0.0) continue;
      const double wt = a * mori_kernel(s, w, beta, m, k);
      norm += wt;
      terms.emplace_back(s.energies(m) - s.energies(k), wt);
    }
  std::vector<std::complex<double>> out;
  const std::complex<double> I(0.0, 1.0);
  for (const auto& z : z_grid) {
    std::complex<double> acc = 0.0;
    for (const auto& [om, wt] : terms) acc += wt / (z + om);
    out.push_back(I * acc / norm);
  }
  return out;
}

SumRuleCheck verify_sum_rule(const SpectrumResult& s, double beta) {
  double zpart = 0.0;
  const auto w = boltzmann(s, beta, zpart);
  const Eigen::Index n = s.energies.size();
  // Im chi(w + i0) = -pi sum_{omega_nm > 0} weight delta(w - omega_nm), so the
  // integral is twice the sum of weight / omega over positive poles.
  double integral = 0.0;
  for (Eigen::Index m = 0; m < n; ++m)
    for (Eigen::Index k = 0; k < n; ++k) {
      const double om = s.energies(k) - s.energies(m);
      if (om <= s.degeneracy_tol) continue;
      const double a = s.sz(m, k) * s.sz(m, k);
      integral += 2.0 * a * (w[static_cast<std::size_t>(m)] - w[static_cast<std::size_t>(k)]) / zpart / om;
    }
  SumRuleCheck c;
  c.beta_m2 = beta * mori_product(s, s.sz.cwiseAbs2(), beta);
  c.integral = integral;
  c.residual = std::abs(c.integral - c.beta_m2) / c.beta_m2;
  return c;
}

double verify_relaxation_identity(const SpectrumResult& s, double delta, double beta,
                                  const std::vector<std::complex<double>>& z_grid) {
  const auto chi = susceptibility(s, beta, z_grid);
  const auto sy = mori_relaxation_y(s, beta, z_grid);
  const double nz = mori_product(s, s.sz.cwiseAbs2(), beta);
  const double ny = mori_product(s, s.sy_imag.cwiseAbs2(), beta);
  const std::complex<double> I(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < z_grid.size(); ++i) {
    const auto z = z_grid[i];
    const std::complex<double> t1 = I / z;
    const std::complex<double> t2 = delta * delta * (ny / nz) * sy[i] / (z * z);
    const double scale = std::max({std::abs(chi.sigma_z[i]), std::abs(t1), std::abs(t2)});
    worst = std::max(worst, std::abs(chi.sigma_z[i] - t1 - t2) / scale);
  }
  return worst;
}

RelaxationTrace relax_sigma_z(double delta, const DiscretizedBath& bath, const FockSpec& spec, double h,
                              const std::vector<double>& t_grid, double linearity_tol) {
  if (!(h > 0.0)) throw DomainError("relax_sigma_z needs h > 0");
  for (double t : t_grid)
    if (!std::isfinite(t)) throw DomainError("relax_sigma_z: non-finite time");
  const SpectrumResult s = diagonalize(delta, bath, spec, 0.0);

  auto trace = [&](double field) {
    const Eigen::MatrixXd Hh = build_hamiltonian(delta, bath, spec, field);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hh);
    if (es.info() != Eigen::Success) throw NumericalAccuracyError("eigensolver did not converge", 0.0);
    const Eigen::VectorXd c = s.vectors.transpose() * es.eigenvectors().col(0);
    const Eigen::Index n = c.size();
    // Pairs (m < k) with non-negligible amplitude; <sz(t)> = sum c_m c_k sz_mk cos(w t).
    std::vector<std::pair<double, double>> terms;
    double diag = 0.0;
    const double cmax = c.cwiseAbs().maxCoeff();
    for (Eigen::Index m = 0; m < n; ++m) {
      if (std::abs(c(m)) < 1e-14 * cmax) continue;
      diag += c(m) * c(m) * s.sz(m, m);
      for (Eigen::Index k = m + 1; k < n; ++k) {
        const double a = 2.0 * c(m) * c(k) * s.sz(m, k);
        if (a != 0.0) terms.emplace_back(s.energies(k) - s.energies(m), a);
      }
    }
    double z0 = diag;
    for (const auto& tm : terms) z0 += tm.second;
    std::vector<double> out;
    out.reserve(t_grid.size());
    for (double t : t_grid) {
      if (t == 0.0) {
        out.push_back(1.0);
        continue;
      }
      double v = diag;
      for (const auto& [om, a] : terms) v += a * std::cos(om * t);
      out.push_back(v / z0);
    }
    return out;
  };

  RelaxationTrace r;
  r.t = t_grid;
  r.h = h;
  r.sigma_z = trace(h);
  const auto half = trace(0.5 * h);
  for (std::size_t i = 0; i < half.size(); ++i)
    r.linearity_residual = std::max(r.linearity_residual, std::abs(r.sigma_z[i] - half[i]));
  r.nonlinear = r.linearity_residual > linearity_tol;
  return r;
}

std::vector<ConvergenceCheck> check_truncation(double delta, const DiscretizedBath& bath, const FockSpec& spec,
                                               const std::vector<double>& betas, double tol) {
  const FockSpec big = spec.doubled();
  if (big.dimension() > big.budget) {
    ConvergenceCheck c;
    c.reason = "doubled truncation exceeds the dimension budget";
    return std::vector<ConvergenceCheck>(betas.size(), c);
  }
  const auto small_spectrum = diagonalize(delta, bath, spec);
  const auto big_spectrum = diagonalize(delta, bath, big);
  std::vector<ConvergenceCheck> out;
  for (double beta : betas) {
    const auto a = thermal_observables(small_spectrum, delta, beta);
    const auto b = thermal_observables(big_spectrum, delta, beta);
    ConvergenceCheck c;
    c.d_m2 = std::abs(a.m2 - b.m2);
    c.d_sigma_x = std::abs(a.sigma_x - b.sigma_x);
    c.converged = c.d_m2 < tol && c.d_sigma_x < tol;
    if (!c.converged) c.reason = "observables change under doubling of the Fock cutoffs";
    out.push_back(c);
  }
  return out;
}

ConvergenceCheck check_truncation(double delta, const DiscretizedBath& bath, const FockSpec& spec, double beta,
                                  double tol) {
  return check_truncation(delta, bath, spec, std::vector<double>{beta}, tol).front();
}

}  // namespace drabi
