#include "drabi/bkt.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "drabi/error.hpp"
#include "drabi/rng.hpp"

namespace drabi {

ValueWithError psi(double alpha, const MCEstimate& m2) {
  if (!(m2.mean >= 0.0 && m2.mean <= 1.0)) throw DomainError("psi needs m2 in [0, 1]");
  return {alpha * m2.mean, std::abs(alpha) * m2.std_error};
}

PsiPoint make_psi_point(double g, double alpha, double beta, const MCEstimate& m2) {
  const auto p = psi(alpha, m2);
  return PsiPoint{g, alpha, beta, p.value, p.error};
}

GValue g_function(double psi_value, double psi_err, double beta) {
  if (!(beta > 0.0)) throw DomainError("g_function needs beta > 0");
  if (psi_value == 1.0) throw DomainError("g_function: pole at psi = 1");
  GValue out;
  const double d = psi_value - 1.0;
  out.value = 1.0 / d - 2.0 * std::log(beta);
  out.error = psi_err / (d * d);
  if (psi_value <= 1.0 + 3.0 * psi_err) {
    out.usable = false;
    std::ostringstream os;
    os << "psi = " << psi_value << " +- " << psi_err << " not above 1 by 3 sigma";
    out.reason = os.str();
  }
  return out;
}

Beta0Fit fit_beta0(const std::vector<PsiPoint>& points, bool free_psi_c) {
  const int np = free_psi_c ? 2 : 1;
  const int n = static_cast<int>(points.size());
  if (n < np + 1) throw FitError("fit_beta0: need more points than parameters");
  std::vector<double> x(n), y(n), s(n);
  for (int i = 0; i < n; ++i) {
    x[i] = std::log(points[i].beta);
    y[i] = points[i].psi;
    s[i] = points[i].psi_err;
    if (!(s[i] > 0.0)) throw FitError("fit_beta0: every point needs a positive error");
  }

  double u = 0.0, c = 1.0;
  {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      if (y[i] <= 1.0) continue;
      const double w = 1.0 / (s[i] * s[i]);
      num += w * (x[i] - 0.5 / (y[i] - 1.0));
      den += w;
    }
    if (den == 0.0) throw FitError("fit_beta0: no point with psi > 1");
    u = num / den;
  }
  const double xmin = *std::min_element(x.begin(), x.end());
  u = std::min(u, xmin - 1e-3);

  auto chi2_at = [&](double uu, double cc) {
    double chi2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = (y[i] - cc * (1.0 + 0.5 / (x[i] - uu))) / s[i];
      chi2 += r * r;
    }
    return chi2;
  };

  Beta0Fit fit;
  fit.free_psi_c = free_psi_c;
  double chi2 = chi2_at(u, c);
  double cuu = 0.0, ccc = 0.0;
  bool converged = false;
  int it = 0;
  for (; it < 200; ++it) {
    // Normal equations for (u, c).
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = x[i] - u;
      const double r = (y[i] - c * (1.0 + 0.5 / d)) / s[i];
      const double ju = c * 0.5 / (d * d) / s[i];
      const double jc = (1.0 + 0.5 / d) / s[i];
      a11 += ju * ju;
      a12 += ju * jc;
      a22 += jc * jc;
      b1 += ju * r;
      b2 += jc * r;
    }
    double du = 0.0, dc = 0.0;
    if (free_psi_c) {
      const double det = a11 * a22 - a12 * a12;
      if (!(det > 0.0)) throw FitError("fit_beta0: singular normal equations");
      du = (a22 * b1 - a12 * b2) / det;
      dc = (a11 * b2 - a12 * b1) / det;
      cuu = a22 / det;
      ccc = a11 / det;
    } else {
      if (!(a11 > 0.0)) throw FitError("fit_beta0: singular normal equations");
      du = b1 / a11;
      cuu = 1.0 / a11;
    }
    // Step halving keeps ln beta0 below every ln beta and chi^2 non-increasing.
    double lam = 1.0;
    double nu = u + du, nc = c + dc, nchi2 = 0.0;
    for (int h = 0; h < 60; ++h) {
      nu = u + lam * du;
      nc = c + lam * dc;
      if (nu < xmin) {
        nchi2 = chi2_at(nu, nc);
        if (nchi2 <= chi2 * (1.0 + 1e-12) + 1e-300) break;
      }
      lam *= 0.5;
    }
    const bool small = std::abs(nu - u) <= 1e-12 * (1.0 + std::abs(u)) &&
                       std::abs(nc - c) <= 1e-12 * (1.0 + std::abs(c));
    u = nu;
    c = nc;
    chi2 = chi2_at(u, c);
    if (std::abs(u) > 1e3) break;
    if (small) {
      converged = true;
      break;
    }
  }
  fit.iterations = it + 1;
  fit.residuals.resize(n);
  for (int i = 0; i < n; ++i) fit.residuals[i] = (y[i] - c * (1.0 + 0.5 / (x[i] - u))) / s[i];

  auto describe = [&](const std::string& why) {
    std::ostringstream os;
    os << "fit_beta0: " << why << " (ln beta0 = " << u << ", psi_c = " << c << ", chi2 = " << chi2
       << "); residuals:";
    for (double r : fit.residuals) os << ' ' << r;
    return os.str();
  };
  if (!converged) throw FitError(describe("did not converge"));

  fit.ln_beta0 = u;
  fit.ln_beta0_err = std::sqrt(cuu);
  fit.beta0 = std::exp(u);
  fit.beta0_err = fit.beta0 * fit.ln_beta0_err;
  fit.psi_c = c;
  fit.psi_c_err = free_psi_c ? std::sqrt(ccc) : 0.0;
  fit.chi2 = chi2;
  fit.dof = n - np;
  fit.reduced_chi2 = chi2 / fit.dof;
  fit.p_value = boost::math::gamma_q(0.5 * fit.dof, 0.5 * chi2);
  if (fit.p_value < 1e-6) throw FitError(describe("model rejected, chi2 p-value below 1e-6"));
  return fit;
}

namespace {

struct Group {
  double g;
  double alpha;
  std::vector<PsiPoint> pts;
};

// Fits G vs ln beta for every group using only the points flagged usable.
std::vector<SlopeFit> fit_slopes(const std::vector<Group>& groups,
                                 const std::vector<std::vector<bool>>& use, double x0, int min_betas,
                                 bool* bad_point) {
  std::vector<SlopeFit> out;
  for (std::size_t k = 0; k < groups.size(); ++k) {
    SlopeFit f;
    f.g = groups[k].g;
    f.alpha = groups[k].alpha;
    f.x0 = x0;
    std::vector<double> xs, ys, ss;
    for (std::size_t i = 0; i < groups[k].pts.size(); ++i) {
      if (!use[k][i]) continue;
      const auto& p = groups[k].pts[i];
      if (p.psi <= 1.0) {
        if (bad_point) *bad_point = true;
        continue;
      }
      const double d = p.psi - 1.0;
      xs.push_back(std::log(p.beta) - x0);
      ys.push_back(1.0 / d - 2.0 * std::log(p.beta));
      ss.push_back(p.psi_err / (d * d));
    }
    f.n_points = static_cast<int>(xs.size());
    if (f.n_points >= min_betas) {
      const auto lf = weighted_linear_fit(xs, ys, ss);
      f.usable = true;
      f.slope = lf.slope;
      f.slope_err = lf.slope_err;
      f.level = lf.intercept;
      f.level_err = lf.intercept_err;
      f.chi2 = lf.chi2;
    } else {
      f.reason = "fewer than " + std::to_string(min_betas) + " beta values with psi above 1 + 3 sigma";
    }
    out.push_back(f);
  }
  return out;
}

// Index k of the first usable pair (k, next usable) whose slope goes from
// positive to non-positive; returns false when there is none.
bool find_bracket(const std::vector<SlopeFit>& s, std::size_t& lo, std::size_t& hi) {
  std::size_t prev = s.size();
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!s[k].usable) continue;
    if (prev < s.size() && s[prev].slope > 0.0 && s[k].slope <= 0.0) {
      lo = prev;
      hi = k;
      return true;
    }
    prev = k;
  }
  return false;
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double q = 0.0;
  for (double x : v) q += (x - m) * (x - m);
  return std::sqrt(q / static_cast<double>(v.size() - 1));
}

}  // namespace

CriticalFit find_critical(const std::vector<PsiPoint>& points, const CriticalOptions& opt) {
  std::map<double, Group> by_g;
  for (const auto& p : points) {
    auto& grp = by_g[p.g];
    grp.g = p.g;
    grp.alpha = p.alpha;
    grp.pts.push_back(p);
  }
  if (static_cast<int>(by_g.size()) < opt.min_groups) {
    throw FitError("find_critical: need at least " + std::to_string(opt.min_groups) +
                   " coupling values, got " + std::to_string(by_g.size()));
  }
  std::vector<Group> groups;
  double x0 = 0.0;
  for (auto& [g, grp] : by_g) {
    std::sort(grp.pts.begin(), grp.pts.end(),
              [](const PsiPoint& a, const PsiPoint& b) { return a.beta < b.beta; });
    std::vector<double> betas;
    for (const auto& p : grp.pts) {
      if (betas.empty() || betas.back() != p.beta) betas.push_back(p.beta);
      x0 += std::log(p.beta);
    }
    if (static_cast<int>(betas.size()) < opt.min_betas) {
      std::ostringstream os;
      os << "find_critical: insufficient beta coverage at g = " << g << " (" << betas.size()
         << " values, need " << opt.min_betas << ")";
      throw FitError(os.str());
    }
    groups.push_back(grp);
  }
  x0 /= static_cast<double>(points.size());

  std::vector<std::vector<bool>> use(groups.size());
  for (std::size_t k = 0; k < groups.size(); ++k)
    for (const auto& p : groups[k].pts) use[k].push_back(p.psi > 1.0 + 3.0 * p.psi_err);

  CriticalFit fit;
  fit.slopes = fit_slopes(groups, use, x0, opt.min_betas, nullptr);
  std::size_t lo = 0, hi = 0;
  if (!find_bracket(fit.slopes, lo, hi)) {
    std::ostringstream os;
    os << "find_critical: no sign change of dG/dln(beta) across the coupling grid; slopes:";
    for (const auto& s : fit.slopes) {
      os << " g=" << s.g << ':';
      if (s.usable) os << s.slope << "+-" << s.slope_err;
      else os << "excluded";
    }
    throw FitError(os.str());
  }
  fit.bracket_lo = lo;

  auto crossing = [](const std::vector<SlopeFit>& s, std::size_t a, std::size_t b, double& g, double& alpha,
                     double& level) {
    const double t = s[a].slope / (s[a].slope - s[b].slope);
    g = s[a].g + t * (s[b].g - s[a].g);
    alpha = s[a].alpha + t * (s[b].alpha - s[a].alpha);
    level = s[a].level + t * (s[b].level - s[a].level);
    return t;
  };
  double level = 0.0;
  const double t = crossing(fit.slopes, lo, hi, fit.g_c, fit.alpha_c, level);
  fit.ln_beta0 = -0.5 * level;
  fit.beta0 = std::exp(fit.ln_beta0);

  // Psi at the crossing, interpolated per beta, with a free-Psi_c fit.
  {
    std::vector<PsiPoint> at_c;
    for (const auto& a : groups[lo].pts) {
      for (const auto& b : groups[hi].pts) {
        if (a.beta != b.beta) continue;
        const double v = a.psi + t * (b.psi - a.psi);
        const double e = std::hypot((1.0 - t) * a.psi_err, t * b.psi_err);
        at_c.push_back(PsiPoint{fit.g_c, fit.alpha_c, a.beta, v, e});
      }
    }
    fit.at_critical = at_c;
    try {
      const auto f = fit_beta0(at_c, true);
      fit.psi_c = f.psi_c;
      fit.psi_c_err = f.psi_c_err;
    } catch (const FitError& e) {
      fit.psi_c = std::nan("");
      fit.psi_c_err = std::nan("");
      fit.psi_c_note = e.what();
    }
  }

  Rng rng = Rng::for_stream(opt.seed, 0);
  std::vector<double> bg, ba, bl;
  std::vector<Group> rep = groups;
  for (int r = 0; r < opt.bootstrap; ++r) {
    for (std::size_t k = 0; k < groups.size(); ++k)
      for (std::size_t i = 0; i < groups[k].pts.size(); ++i)
        rep[k].pts[i].psi = groups[k].pts[i].psi + groups[k].pts[i].psi_err * rng.normal();
    bool bad = false;
    const auto s = fit_slopes(rep, use, x0, opt.min_betas, &bad);
    std::size_t a = 0, b = 0;
    if (bad || !find_bracket(s, a, b)) {
      ++fit.bootstrap_failed;
      continue;
    }
    double g = 0.0, al = 0.0, lv = 0.0;
    crossing(s, a, b, g, al, lv);
    bg.push_back(g);
    ba.push_back(al);
    bl.push_back(-0.5 * lv);
    ++fit.bootstrap_ok;
  }
  fit.g_c_err = stddev(bg);
  fit.alpha_c_err = stddev(ba);
  fit.ln_beta0_err = stddev(bl);
  fit.beta0_err = fit.beta0 * fit.ln_beta0_err;
  return fit;
}

double gc_from_alpha_c(const ModelParams& p, double alpha_c) {
  if (!(p.alpha_cav > 0.0)) throw DomainError("gc_from_alpha_c needs alpha_cav > 0");
  if (!(p.omega0 > 0.0)) throw DomainError("gc_from_alpha_c needs omega0 > 0");
  if (p.alpha_q >= alpha_c)
    throw NoSolutionError("alpha_q >= alpha_c: the transition is reached already at g = 0");
  return p.omega0 * std::sqrt((alpha_c - p.alpha_q) / (4.0 * p.alpha_cav));
}

}  // namespace drabi
