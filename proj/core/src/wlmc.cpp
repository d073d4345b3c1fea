#include "drabi/wlmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drabi/error.hpp"

namespace drabi {

std::string to_string(UpdateScheme s) {
  switch (s) {
    case UpdateScheme::cluster: return "cluster";
    case UpdateScheme::metropolis: return "metropolis";
    case UpdateScheme::mixed: return "mixed";
  }
  return "unknown";
}

UpdateScheme parse_update_scheme(const std::string& s) {
  if (s == "cluster") return UpdateScheme::cluster;
  if (s == "metropolis") return UpdateScheme::metropolis;
  if (s == "mixed") return UpdateScheme::mixed;
  throw ParseError("unknown update scheme '" + s + "' (cluster|metropolis|mixed)");
}

ObservableSample measure(const Worldline& wl, double delta) {
  ObservableSample s;
  s.m = wl.magnetization();
  s.m2 = s.m * s.m;
  s.n_kinks = wl.n_kinks();
  s.sigma_x_est = delta > 0.0 ? 2.0 * static_cast<double>(s.n_kinks) / (wl.beta * delta) : 0.0;
  s.hq_est = -(0.5 * delta) * s.sigma_x_est;
  return s;
}

void ChainAccumulators::add(const ObservableSample& s, std::uint64_t bin_len) {
  bin_m += s.m;
  bin_m2 += s.m2;
  bin_sx += s.sigma_x_est;
  ac_m2.add(s.m2);
  ac_sx.add(s.sigma_x_est);
  if (++in_bin == bin_len) {
    const double n = static_cast<double>(bin_len);
    bins_m.push_back(bin_m / n);
    bins_m2.push_back(bin_m2 / n);
    bins_sx.push_back(bin_sx / n);
    bin_m = bin_m2 = bin_sx = 0.0;
    in_bin = 0;
  }
}

ChainState make_chain(double beta, const Schedule& sched) {
  if (!(beta > 0.0)) throw DomainError("chain needs beta > 0");
  if (sched.bin_len == 0) throw DomainError("schedule needs bin_len > 0");
  return ChainState{init_worldline(beta), Rng::for_stream(sched.seed, sched.chain), 0, 0, 0,
                    ChainAccumulators(sched.autocorr_max_lag)};
}

namespace {

void check_table(const KernelTable& kt, double beta) {
  if (std::abs(kt.beta() - beta) > 1e-12 * beta)
    throw DomainError("kernel table beta does not match the worldline");
}

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a < b) std::swap(a, b);
    parent[a] = b;
  }
};

}  // namespace

void cluster_sweep(ChainState& st, const KernelTable& kt, double delta) {
  Worldline& wl = st.worldline;
  const double beta = wl.beta;
  check_table(kt, beta);

  std::vector<double> cuts;
  const double rate = 0.5 * delta;
  if (rate > 0.0) {
    double t = st.rng.exponential() / rate;
    while (t < beta) {
      cuts.push_back(t);
      t += st.rng.exponential() / rate;
    }
  }

  auto segs = segments_with_cuts(wl, cuts);
  const std::size_t n = segs.size();
  UnionFind uf(n);

  if (n > 1 && !kt.zero()) {
    // Visit pairs by increasing cyclic distance so that most long-range pairs
    // are already connected and can be skipped without drawing a bond.
    for (std::size_t d = 1; d <= n / 2; ++d) {
      const std::size_t imax = (2 * d == n) ? n / 2 : n;
      for (std::size_t i = 0; i < imax; ++i) {
        std::size_t a = i;
        std::size_t b = (i + d) % n;
        if (segs[a].sign != segs[b].sign) continue;
        if (uf.find(static_cast<std::uint32_t>(a)) == uf.find(static_cast<std::uint32_t>(b))) continue;
        if (a > b) std::swap(a, b);
        const double j = kt.pair_integral(segs[a].start, segs[a].end, segs[b].start, segs[b].end);
        const double p = -std::expm1(-2.0 * j);
        if (st.rng.uniform() < p) uf.unite(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));
      }
    }
  }

  std::vector<signed char> flip(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (uf.find(static_cast<std::uint32_t>(i)) == i) flip[i] = st.rng.uniform() < 0.5 ? -1 : 1;
  }
  for (std::size_t i = 0; i < n; ++i) segs[i].sign *= flip[uf.find(static_cast<std::uint32_t>(i))];

  wl = worldline_from_segments(beta, segs);
}

namespace {

// sum_j sign_j int_0^L int_j K for outside segments delimited by the rotated
// kink times in (L, beta), the first of which has sign first_sign.
double outside_field(const KernelTable& kt, double length, double beta,
                     const std::vector<double>& rotated, int first_sign) {
  int s = first_sign;
  double field = 0.0;
  double c = length;
  for (double r : rotated) {
    r = std::clamp(r, c, beta);
    field += s * kt.pair_integral(0.0, length, c, r);
    s = -s;
    c = r;
  }
  field += s * kt.pair_integral(0.0, length, c, beta);
  return field;
}

}  // namespace

double arc_field(const Worldline& wl, const KernelTable& kt, double start, double length) {
  const double beta = wl.beta;
  if (kt.zero() || length >= beta) return 0.0;
  const auto& k = wl.kinks;
  const auto split = std::upper_bound(k.begin(), k.end(), start);
  std::vector<double> rotated;
  rotated.reserve(k.size());
  for (auto it = split; it != k.end(); ++it) rotated.push_back(*it - start);
  for (auto it = k.begin(); it != split; ++it) rotated.push_back(*it - start + beta);
  return outside_field(kt, length, beta, rotated, wl.sign_at(start));
}

double log_weight(const Worldline& wl, const KernelTable& kt) {
  const auto segs = segments_with_cuts(wl, {});
  double lw = 0.0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    lw += kt.W(segs[i].end - segs[i].start);
    for (std::size_t j = i + 1; j < segs.size(); ++j)
      lw += segs[i].sign * segs[j].sign *
            kt.pair_integral(segs[i].start, segs[i].end, segs[j].start, segs[j].end);
  }
  return lw;
}

bool metropolis_kink_pair(ChainState& st, const KernelTable& kt, double delta) {
  Worldline& wl = st.worldline;
  const double beta = wl.beta;
  check_table(kt, beta);
  auto& k = wl.kinks;
  const std::size_t n = k.size();
  const double fugacity = 0.5 * delta;
  ++st.proposed;

  const bool insert = st.rng.uniform() < 0.5;
  if (insert) {
    const double ta = beta * st.rng.uniform();
    const double tb = beta * st.rng.uniform();
    const double u = st.rng.uniform();
    if (ta == tb) return false;
    const double length = tb > ta ? tb - ta : tb - ta + beta;
    // The arc must not contain an existing kink.
    if (n > 0) {
      const auto it = std::upper_bound(k.begin(), k.end(), ta);
      const double next = it != k.end() ? *it : k.front() + beta;
      if (next < ta + length) return false;
    }
    const int s = wl.sign_at(ta);
    const double dlogw = -2.0 * s * arc_field(wl, kt, ta, length);
    const double ratio = fugacity * fugacity * beta * beta / static_cast<double>(n + 2) * std::exp(dlogw);
    if (!(u < ratio)) return false;
    const bool contains_zero = ta == 0.0 || tb < ta;
    k.insert(std::upper_bound(k.begin(), k.end(), ta), ta);
    k.insert(std::upper_bound(k.begin(), k.end(), tb), tb);
    if (contains_zero) wl.base_sign = -wl.base_sign;
    ++st.accepted;
    return true;
  }

  if (n == 0) return false;
  const std::size_t i = static_cast<std::size_t>(st.rng.below(n));
  const double u = st.rng.uniform();
  const std::size_t j = (i + 1) % n;
  const double ta = k[i];
  const double length = j > i ? k[j] - ta : k[j] - ta + beta;
  const int s = wl.sign_at(ta);
  double field = 0.0;
  if (!kt.zero() && n > 2) {
    std::vector<double> rotated;
    rotated.reserve(n - 2);
    for (std::size_t q = (j + 1) % n; q != i; q = (q + 1) % n) {
      const double r = k[q] - ta;
      rotated.push_back(r < 0.0 ? r + beta : r);
    }
    field = outside_field(kt, length, beta, rotated, -s);
  } else if (!kt.zero()) {
    field = outside_field(kt, length, beta, {}, -s);
  }
  const double dlogw = -2.0 * s * field;
  const double ratio = static_cast<double>(n) / (fugacity * fugacity * beta * beta) * std::exp(dlogw);
  if (!(u < ratio)) return false;
  const bool contains_zero = ta == 0.0 || j < i;
  if (j > i) {
    k.erase(k.begin() + static_cast<std::ptrdiff_t>(j));
    k.erase(k.begin() + static_cast<std::ptrdiff_t>(i));
  } else {
    k.erase(k.begin() + static_cast<std::ptrdiff_t>(i));
    k.erase(k.begin() + static_cast<std::ptrdiff_t>(j));
  }
  if (contains_zero) wl.base_sign = -wl.base_sign;
  ++st.accepted;
  return true;
}

int metropolis_moves_per_sweep(const Schedule& sched, double beta, double delta) {
  if (sched.metropolis_moves > 0) return sched.metropolis_moves;
  return std::max(10, static_cast<int>(std::ceil(beta * delta)));
}

void advance(ChainState& st, const KernelTable& kt, double delta, const Schedule& sched,
             std::uint64_t until, const std::function<void(const ChainState&)>& on_checkpoint) {
  const double beta = st.worldline.beta;
  const int moves = metropolis_moves_per_sweep(sched, beta, delta);
  while (st.sweep < until) {
    if (sched.updates != UpdateScheme::metropolis) cluster_sweep(st, kt, delta);
    if (sched.updates != UpdateScheme::cluster)
      for (int m = 0; m < moves; ++m) metropolis_kink_pair(st, kt, delta);
    ++st.sweep;
    if (st.sweep > sched.n_therm) st.acc.add(measure(st.worldline, delta), sched.bin_len);
    if (sched.checkpoint_every > 0 && st.sweep % sched.checkpoint_every == 0 && on_checkpoint)
      on_checkpoint(st);
  }
}

Estimates estimate(const std::vector<const ChainState*>& chains, double delta, double beta,
                   const Schedule& sched, int bootstrap_resamples) {
  std::vector<double> bm, bm2, bsx;
  double tau_m2 = 0.0, tau_sx = 0.0, weight = 0.0;
  for (const ChainState* c : chains) {
    const auto& a = c->acc;
    bm.insert(bm.end(), a.bins_m.begin(), a.bins_m.end());
    bm2.insert(bm2.end(), a.bins_m2.begin(), a.bins_m2.end());
    bsx.insert(bsx.end(), a.bins_sx.begin(), a.bins_sx.end());
    const double w = static_cast<double>(a.ac_m2.count());
    tau_m2 += w * a.ac_m2.tau_int();
    tau_sx += w * a.ac_sx.tau_int();
    weight += w;
  }
  if (weight > 0.0) {
    tau_m2 /= weight;
    tau_sx /= weight;
  } else {
    tau_m2 = tau_sx = 0.5;
  }

  const std::uint64_t n_samples = bm.size() * sched.bin_len;
  auto make = [&](std::span<const double> bins, double tau) {
    MCEstimate e;
    e.mean = sample_mean(bins);
    e.std_error = standard_error(bins);
    e.tau_int = tau;
    e.n_samples = n_samples;
    e.n_therm = sched.n_therm;
    e.bin_warning = static_cast<double>(sched.bin_len) < 20.0 * tau;
    return e;
  };

  Estimates out;
  out.m = make(bm, tau_m2);
  out.m2 = make(bm2, tau_m2);
  out.sigma_x = make(bsx, tau_sx);
  out.hq = out.sigma_x;
  out.hq.mean = -(0.5 * delta) * out.sigma_x.mean;
  out.hq.std_error = (0.5 * delta) * out.sigma_x.std_error;

  if (bm2.size() < 2) {
    out.delta_eff_reason = "fewer than two bins";
  } else if (delta == 0.0) {
    MCEstimate d = out.sigma_x;
    d.mean = 0.0;
    d.std_error = 0.0;
    out.delta_eff = d;
  } else if (out.m2.mean - 3.0 * out.m2.std_error <= 0.0) {
    out.delta_eff_reason = "M2 consistent with zero";
  } else {
    auto gap = [delta, beta](std::span<const double> means) {
      const double ratio = 2.0 * means[1] / (beta * delta) / means[0];
      return ratio >= 0.0 ? delta * std::sqrt(ratio) : std::nan("");
    };
    const std::vector<double> means{out.m2.mean, out.sigma_x.mean};
    MCEstimate d;
    d.mean = gap(means);
    Rng boot = Rng::for_stream(sched.seed ^ 0xb0075eedULL, 0x5eed);
    d.std_error = bootstrap_error({bm2, bsx}, gap, boot, bootstrap_resamples);
    d.tau_int = std::max(tau_m2, tau_sx);
    d.n_samples = n_samples;
    d.n_therm = sched.n_therm;
    d.bin_warning = out.m2.bin_warning || out.sigma_x.bin_warning;
    out.delta_eff = d;
  }
  return out;
}

Estimates run_chain(double delta, const KernelTable& kt, const Schedule& sched, int bootstrap_resamples) {
  ChainState st = make_chain(kt.beta(), sched);
  advance(st, kt, delta, sched, sched.n_therm + sched.n_sweeps);
  return estimate({&st}, delta, kt.beta(), sched, bootstrap_resamples);
}

}  // namespace drabi
