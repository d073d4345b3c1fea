#include "drabi/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "drabi/chain_io.hpp"
#include "drabi/error.hpp"
#include "drabi/kernel_table.hpp"

namespace drabi {
namespace {

using json = nlohmann::ordered_json;

// Runs f(i) for i in [0, n) on `threads` workers. The exception of the lowest
// failing index is rethrown after all workers stop.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first;
  std::size_t first_index = n;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (i < first_index) {
          first_index = i;
          first = std::current_exception();
        }
      }
    }
  };
  const int t = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (t == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < t; ++k) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first) std::rethrow_exception(first);
}

std::string fmt17(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

// Compact form for labels.
std::string fmt_short(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

json echo_json(const Echo& e) {
  json j = json::object();
  for (const auto& [k, v] : e) j[k] = v;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
  if (!os) throw Error("write failed for " + path.string());
}

std::uint64_t effective_seed(const RunConfig& cfg, const HarnessOptions& opt) {
  return opt.seed ? *opt.seed : cfg.seed;
}

void log_line(const HarnessOptions& opt, const std::string& s) {
  if (opt.log) *opt.log << s << std::endl;
}

struct Point {
  double coupling;
  double beta;
};

std::vector<Point> grid_points(const RunConfig& cfg) {
  std::vector<Point> pts;
  for (double c : cfg.couplings())
    for (double b : cfg.beta_list) pts.push_back({c, b});
  return pts;
}

// Keys that change the sample stream of a chain; grids, output location and
// post-processing settings are left out so that a point can be resumed from
// a run with a different grid.
Echo chain_echo(const RunConfig& cfg, std::uint64_t seed, const Point& p, std::size_t chain,
                std::uint64_t stream) {
  static const std::vector<std::string> skip = {"out_dir", "checkpoint_every", "bootstrap", "g_list",
                                                "alpha_list", "beta_list", "seed"};
  Echo e;
  for (const auto& kv : cfg.echo()) {
    if (std::find(skip.begin(), skip.end(), kv.first) != skip.end()) continue;
    e.push_back(kv);
  }
  e.emplace_back("seed", std::to_string(seed));
  e.emplace_back("coupling", fmt17(p.coupling));
  e.emplace_back("beta", fmt17(p.beta));
  e.emplace_back("chain", std::to_string(chain));
  e.emplace_back("stream", std::to_string(stream));
  return e;
}

Schedule chain_schedule(const RunConfig& cfg, std::uint64_t seed, std::uint64_t stream) {
  Schedule s;
  s.n_therm = cfg.n_therm;
  s.n_sweeps = cfg.n_sweeps;
  s.bin_len = cfg.bin_len;
  s.seed = seed;
  s.chain = stream;
  s.updates = cfg.updates;
  s.metropolis_moves = cfg.metropolis_moves;
  s.checkpoint_every = cfg.checkpoint_every;
  s.autocorr_max_lag = cfg.autocorr_max_lag;
  return s;
}

json estimate_json(const MCEstimate& e) {
  return json{{"mean", e.mean},       {"std_error", e.std_error}, {"tau_int", e.tau_int},
              {"n_samples", e.n_samples}, {"n_therm", e.n_therm}, {"bin_warning", e.bin_warning}};
}

const std::vector<std::string> kColumns = {
    "bath",  "g",          "alpha_eff", "alpha_total", "beta",        "delta",         "m2",
    "m2_err", "m2_tau",    "m",         "m_err",       "sigma_x",     "sigma_x_err",   "sigma_x_tau",
    "hq",    "hq_err",     "delta_eff", "delta_eff_err", "n_samples", "n_chains",      "bin_warning"};

int n_max_for(const RunConfig& cfg, std::size_t i) {
  if (cfg.n_max.empty()) throw ParseError("config: key 'n_max': required for exact diagonalization");
  return cfg.n_max.size() == 1 ? cfg.n_max[0] : cfg.n_max.at(i);
}

FockSpec fock_for(const RunConfig& cfg, const DiscretizedBath& bath) {
  FockSpec spec;
  spec.budget = cfg.ed_budget;
  if (cfg.n_max.size() > 1 && cfg.n_max.size() != bath.modes.size())
    throw ParseError("config: key 'n_max': " + std::to_string(cfg.n_max.size()) + " cutoffs for " +
                     std::to_string(bath.modes.size()) + " modes");
  for (std::size_t i = 0; i < bath.modes.size(); ++i) spec.n_max.push_back(n_max_for(cfg, i));
  return spec;
}

// Discrete bath used by the ED commands for one swept coupling.
DiscretizedBath ed_bath(const RunConfig& cfg, double coupling) {
  if (cfg.bath == SpectralKind::discrete) return config_bath(cfg);
  const SpectralDensity sd = make_density(cfg, coupling);
  if (sd.is_zero()) return DiscretizedBath{{}, sd.describe() + "; no modes"};
  if (cfg.ed_modes < 1) throw ParseError("config: key 'ed_modes': needed to discretize a continuous bath");
  return discretize_bath(sd, cfg.ed_modes, parse_discretization(cfg.ed_scheme));
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

std::filesystem::path output_dir(const RunConfig& cfg, const HarnessOptions& opt) {
  return opt.out_dir.empty() ? std::filesystem::path(cfg.out_dir) : opt.out_dir;
}

DiscretizedBath config_bath(const RunConfig& cfg) {
  if (!cfg.bath_file.empty()) {
    std::ifstream is(cfg.bath_file);
    if (!is) throw ParseError("config: key 'bath_file': cannot open '" + cfg.bath_file + "'");
    return read_bath(is);
  }
  return DiscretizedBath{cfg.modes, "modes from config"};
}

SpectralDensity make_density(const RunConfig& cfg, double coupling) {
  switch (cfg.bath) {
    case SpectralKind::structured: {
      ModelParams p = cfg.params;
      p.g = coupling;
      return SpectralDensity::structured(p, cfg.truncate);
    }
    case SpectralKind::pure_ohmic: return SpectralDensity::pure_ohmic(coupling, cfg.params.omega_c);
    case SpectralKind::discrete: return SpectralDensity::discrete(config_bath(cfg).modes);
  }
  throw Error("unknown bath kind");
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  for (std::size_t i = 0; i < kColumns.size(); ++i) os << (i ? "," : "") << kColumns[i];
  os << '\n';
  os << std::setprecision(17);
  for (const auto& r : rows) {
    const auto& e = r.est;
    const double de = e.delta_eff ? e.delta_eff->mean : std::nan("");
    const double dee = e.delta_eff ? e.delta_eff->std_error : std::nan("");
    const bool warn = e.m2.bin_warning || e.sigma_x.bin_warning;
    os << r.bath << ',' << r.g << ',' << r.alpha_eff << ',' << r.alpha_total << ',' << r.beta << ',' << r.delta
       << ',' << e.m2.mean << ',' << e.m2.std_error << ',' << e.m2.tau_int << ',' << e.m.mean << ','
       << e.m.std_error << ',' << e.sigma_x.mean << ',' << e.sigma_x.std_error << ',' << e.sigma_x.tau_int << ','
       << e.hq.mean << ',' << e.hq.std_error << ',' << de << ',' << dee << ',' << e.m2.n_samples << ','
       << r.n_chains << ',' << (warn ? 1 : 0) << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& is, const std::string& source) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError(source + ": empty results table");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string c;
    while (std::getline(hs, c, ',')) header.push_back(c);
  }
  if (header != kColumns) throw ParseError(source + ": unexpected column layout");
  std::vector<ResultRow> rows;
  int ln = 1;
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) f.push_back(c);
    if (f.size() != kColumns.size()) throw ParseError(source + ":" + std::to_string(ln) + ": wrong field count");
    auto num = [&](std::size_t i) {
      char* end = nullptr;
      const double v = std::strtod(f[i].c_str(), &end);
      if (end == f[i].c_str() || *end != '\0')
        throw ParseError(source + ":" + std::to_string(ln) + ": bad number in column " + kColumns[i]);
      return v;
    };
    ResultRow r;
    r.bath = f[0];
    r.g = num(1);
    r.alpha_eff = num(2);
    r.alpha_total = num(3);
    r.beta = num(4);
    r.delta = num(5);
    r.est.m2 = MCEstimate{num(6), num(7), num(8), static_cast<std::uint64_t>(num(18)), 0, num(20) != 0.0};
    r.est.m = MCEstimate{num(9), num(10), num(8), r.est.m2.n_samples, 0, false};
    r.est.sigma_x = MCEstimate{num(11), num(12), num(13), r.est.m2.n_samples, 0, false};
    r.est.hq = MCEstimate{num(14), num(15), num(13), r.est.m2.n_samples, 0, false};
    if (!std::isnan(num(16))) r.est.delta_eff = MCEstimate{num(16), num(17), 0.5, r.est.m2.n_samples, 0, false};
    r.n_chains = static_cast<int>(num(19));
    rows.push_back(r);
  }
  return rows;
}

std::vector<std::filesystem::path> cmd_kernel_table(const RunConfig& cfg, const HarnessOptions& opt) {
  const auto dir = output_dir(cfg, opt);
  std::filesystem::create_directories(dir);
  const auto pts = grid_points(cfg);
  std::vector<std::filesystem::path> paths(pts.size());
  parallel_for(pts.size(), opt.threads, [&](std::size_t i) {
    const auto kt = KernelTable::build(make_density(cfg, pts[i].coupling), pts[i].beta, cfg.kernel);
    std::ostringstream os;
    kt.write(os);
    paths[i] = dir / ("kernel_" + std::to_string(i) + ".txt");
    write_text(paths[i], os.str());
  });
  for (std::size_t i = 0; i < pts.size(); ++i)
    log_line(opt, "kernel table " + paths[i].string() + " coupling=" + fmt17(pts[i].coupling) +
                      " beta=" + fmt17(pts[i].beta));
  return paths;
}

std::vector<ResultRow> cmd_sweep(const RunConfig& cfg, const HarnessOptions& opt) {
  cfg.validate();
  const auto dir = output_dir(cfg, opt);
  const auto ckdir = dir / "checkpoints";
  std::filesystem::create_directories(ckdir);
  const std::uint64_t seed = effective_seed(cfg, opt);
  const double delta = cfg.params.delta;
  const auto pts = grid_points(cfg);
  const auto nc = static_cast<std::size_t>(cfg.n_chains);
  const auto t_start = std::chrono::steady_clock::now();

  std::vector<KernelTable> tables(pts.size());
  parallel_for(pts.size(), opt.threads, [&](std::size_t i) {
    tables[i] = KernelTable::build(make_density(cfg, pts[i].coupling), pts[i].beta, cfg.kernel);
  });

  const std::uint64_t total = cfg.n_therm + cfg.n_sweeps;
  std::vector<ChainState> states(pts.size() * nc);
  std::vector<double> wall(pts.size() * nc, 0.0);
  std::atomic<bool> interrupted{false};
  parallel_for(states.size(), opt.threads, [&](std::size_t task) {
    const std::size_t pi = task / nc, c = task % nc;
    const std::uint64_t stream = (static_cast<std::uint64_t>(pi) << 20) | c;
    const Schedule sched = chain_schedule(cfg, seed, stream);
    const Echo echo = chain_echo(cfg, seed, pts[pi], c, stream);
    const auto path = ckdir / ("p" + std::to_string(pi) + "_c" + std::to_string(c) + ".ckpt");
    const auto t0 = std::chrono::steady_clock::now();

    ChainState st = make_chain(pts[pi].beta, sched);
    if (opt.resume && std::filesystem::exists(path)) {
      Checkpoint cp = load_checkpoint(path);
      const std::string diff = echo_diff(echo, cp.echo);
      if (!diff.empty())
        throw ResumeMismatch("checkpoint " + path.string() + " belongs to a different run:\n" + diff);
      st = std::move(cp.state);
    }
    std::uint64_t until = total;
    if (opt.stop_after > 0 && opt.stop_after < total) until = std::max(st.sweep, opt.stop_after);
    advance(st, tables[pi], delta, sched, until,
            [&](const ChainState& s) { save_checkpoint(path, echo, s); });
    save_checkpoint(path, echo, st);
    if (st.sweep < total) interrupted = true;
    wall[task] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    states[task] = std::move(st);
  });
  if (interrupted) throw Interrupted("stopped after sweep " + std::to_string(opt.stop_after) + "; resume with --resume");

  std::vector<ResultRow> rows;
  json jrows = json::array();
  json jtimes = json::array();
  for (std::size_t pi = 0; pi < pts.size(); ++pi) {
    std::vector<const ChainState*> chains;
    ResultRow r;
    std::uint64_t proposed = 0, accepted = 0;
    for (std::size_t c = 0; c < nc; ++c) {
      chains.push_back(&states[pi * nc + c]);
      r.wall_time += wall[pi * nc + c];
      proposed += states[pi * nc + c].proposed;
      accepted += states[pi * nc + c].accepted;
    }
    Schedule sched = chain_schedule(cfg, seed, 0);
    r.est = estimate(chains, delta, pts[pi].beta, sched, cfg.bootstrap);
    r.bath = to_string(cfg.bath);
    r.beta = pts[pi].beta;
    r.delta = delta;
    r.n_chains = cfg.n_chains;
    r.metropolis_acceptance = proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
    if (cfg.bath == SpectralKind::structured) {
      ModelParams p = cfg.params;
      p.g = pts[pi].coupling;
      r.g = p.g;
      r.alpha_eff = alpha_eff(p);
      r.alpha_total = r.alpha_eff + p.alpha_q;
    } else if (cfg.bath == SpectralKind::pure_ohmic) {
      r.g = std::nan("");
      r.alpha_eff = r.alpha_total = pts[pi].coupling;
    } else {
      r.g = std::nan("");
      r.alpha_eff = r.alpha_total = 0.0;
    }
    rows.push_back(r);
    log_line(opt, "point g=" + fmt17(r.g) + " alpha=" + fmt17(r.alpha_total) + " beta=" + fmt17(r.beta) +
                      " M2=" + fmt17(r.est.m2.mean) + " +- " + fmt17(r.est.m2.std_error));

    json jr{{"bath", r.bath},
            {"g", r.g},
            {"alpha_eff", r.alpha_eff},
            {"alpha_total", r.alpha_total},
            {"beta", r.beta},
            {"kernel_tol", tables[pi].tol()},
            {"m2", estimate_json(r.est.m2)},
            {"m", estimate_json(r.est.m)},
            {"sigma_x", estimate_json(r.est.sigma_x)},
            {"hq", estimate_json(r.est.hq)},
            {"n_chains", r.n_chains},
            {"metropolis_acceptance", r.metropolis_acceptance}};
    if (r.est.delta_eff) jr["delta_eff"] = estimate_json(*r.est.delta_eff);
    else jr["delta_eff"] = json{{"undefined", r.est.delta_eff_reason}};
    jrows.push_back(jr);
    jtimes.push_back(json{{"coupling", pts[pi].coupling}, {"beta", r.beta}, {"wall_time", r.wall_time}});
  }

  std::ostringstream csv;
  write_results_csv(csv, rows);
  write_text(dir / "results.csv", csv.str());

  json summary{{"command", "sweep"},
               {"config", echo_json(cfg.echo())},
               {"overrides", echo_json(opt.overrides)},
               {"effective_seed", seed},
               {"rows", jrows}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  // Timing varies between runs, so it is kept out of the deterministic outputs.
  json timing{{"threads", opt.threads},
              {"points", jtimes},
              {"wall_time", std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count()}};
  write_text(dir / "timing.json", timing.dump(2) + "\n");
  return rows;
}

std::vector<PsiPoint> psi_points(const std::vector<ResultRow>& rows) {
  std::vector<PsiPoint> pts;
  for (const auto& r : rows) {
    const double control = std::isnan(r.g) ? r.alpha_total : r.g;
    pts.push_back(make_psi_point(control, r.alpha_total, r.beta * r.delta, r.est.m2));
  }
  return pts;
}

CriticalFit cmd_bkt_fit(const std::vector<std::filesystem::path>& results, const HarnessOptions& opt,
                        const CriticalOptions& copt) {
  if (results.empty()) throw ParseError("bkt-fit needs at least one results table");
  std::vector<ResultRow> rows;
  json inputs = json::array();
  for (const auto& p : results) {
    std::ifstream is(p);
    if (!is) throw Error("cannot open results table " + p.string());
    auto r = read_results_csv(is, p.string());
    rows.insert(rows.end(), r.begin(), r.end());
    inputs.push_back(p.string());
  }
  const bool by_alpha = !rows.empty() && std::isnan(rows.front().g);
  const auto pts = psi_points(rows);
  const auto dir = opt.out_dir.empty() ? std::filesystem::path(".") : opt.out_dir;
  std::filesystem::create_directories(dir);

  std::ostringstream curves;
  curves << "control,alpha_total,beta,psi,psi_err,G,G_err,usable\n" << std::setprecision(17);
  for (const auto& p : pts) {
    if (p.psi == 1.0) continue;
    const auto gv = g_function(p.psi, p.psi_err, p.beta);
    curves << p.g << ',' << p.alpha << ',' << p.beta << ',' << p.psi << ',' << p.psi_err << ',' << gv.value << ','
           << gv.error << ',' << (gv.usable ? 1 : 0) << '\n';
  }
  write_text(dir / "g_curves.csv", curves.str());

  json report{{"command", "bkt-fit"}, {"inputs", inputs}, {"control", by_alpha ? "alpha" : "g"},
              {"overrides", echo_json(opt.overrides)}};
  CriticalFit fit;
  try {
    fit = find_critical(pts, copt);
  } catch (const FitError& e) {
    report["error"] = e.what();
    write_text(dir / "bkt_fit.json", report.dump(2) + "\n");
    throw;
  }
  report["g_c"] = fit.g_c;
  report["g_c_err"] = fit.g_c_err;
  report["alpha_c"] = fit.alpha_c;
  report["alpha_c_err"] = fit.alpha_c_err;
  report["ln_beta0"] = fit.ln_beta0;
  report["ln_beta0_err"] = fit.ln_beta0_err;
  report["beta0"] = fit.beta0;
  report["beta0_err"] = fit.beta0_err;
  report["psi_c"] = fit.psi_c;
  report["psi_c_err"] = fit.psi_c_err;
  if (!fit.psi_c_note.empty()) report["psi_c_note"] = fit.psi_c_note;
  report["bootstrap_ok"] = fit.bootstrap_ok;
  report["bootstrap_failed"] = fit.bootstrap_failed;
  json slopes = json::array();
  for (const auto& s : fit.slopes) {
    json js{{"control", s.g}, {"alpha_total", s.alpha}, {"usable", s.usable}, {"n_points", s.n_points}};
    if (s.usable) {
      js["slope"] = s.slope;
      js["slope_err"] = s.slope_err;
      js["G_at_x0"] = s.level;
      js["G_at_x0_err"] = s.level_err;
      js["x0"] = s.x0;
      js["chi2"] = s.chi2;
    } else {
      js["reason"] = s.reason;
    }
    slopes.push_back(js);
  }
  report["slopes"] = slopes;
  try {
    const auto b = fit_beta0(fit.at_critical, false);
    report["beta0_fit"] = json{{"beta0", b.beta0},           {"beta0_err", b.beta0_err},
                               {"ln_beta0", b.ln_beta0},     {"ln_beta0_err", b.ln_beta0_err},
                               {"reduced_chi2", b.reduced_chi2}, {"p_value", b.p_value}};
  } catch (const FitError& e) {
    report["beta0_fit"] = json{{"error", e.what()}};
  }
  write_text(dir / "bkt_fit.json", report.dump(2) + "\n");
  log_line(opt, "critical " + std::string(by_alpha ? "alpha" : "g") + "_c = " + fmt17(fit.g_c) + " +- " +
                    fmt17(fit.g_c_err) + ", alpha_c = " + fmt17(fit.alpha_c) + " +- " + fmt17(fit.alpha_c_err));
  return fit;
}

std::vector<CheckLine> cmd_ed_check(const RunConfig& cfg, const HarnessOptions& opt) {
  const auto dir = output_dir(cfg, opt);
  std::filesystem::create_directories(dir);
  const double delta = cfg.params.delta;
  std::vector<CheckLine> lines;
  json jinst = json::array();
  auto add = [&](const std::string& name, double value, double threshold, const std::string& detail = "") {
    lines.push_back({name, value, threshold, value <= threshold, detail});
  };

  const auto couplings = cfg.couplings();
  for (std::size_t ci = 0; ci < couplings.size(); ++ci) {
    const DiscretizedBath bath = ed_bath(cfg, couplings[ci]);
    const FockSpec spec = fock_for(cfg, bath);
    const SpectrumResult s = diagonalize(delta, bath, spec);
    const std::string tag = "instance " + std::to_string(ci);
    add(tag + " completeness", s.completeness_residual(), 1e-8);
    add(tag + " hermiticity", s.hermiticity_residual(), 1e-8);
    json ji{{"coupling", couplings[ci]}, {"dimension", spec.dimension()}, {"provenance", bath.provenance}};

    const auto convergence = check_truncation(delta, bath, spec, cfg.beta_list);
    for (std::size_t bi = 0; bi < cfg.beta_list.size(); ++bi) {
      const double beta = cfg.beta_list[bi];
      const std::string bt = tag + " beta=" + fmt_short(beta);
      const auto& conv = convergence[bi];
      add(bt + " truncation convergence", std::max(conv.d_m2, conv.d_sigma_x), 1e-6,
          conv.converged ? "" : conv.reason);
      const auto th = thermal_observables(s, delta, beta);
      const double m2_tau = imaginary_time_m2(s, beta);
      add(bt + " (sz,sz) = M2", std::abs(th.mori_zz - m2_tau), 1e-10);
      add(bt + " (sy,sy) = 2<sx>/(beta delta)", std::abs(th.mori_yy - 2.0 * th.sigma_x / (beta * delta)), 1e-10);
      const auto sr = verify_sum_rule(s, beta);
      add(bt + " sum rule", sr.residual, 1e-8);
      json jeps = json::array();
      for (double eps : cfg.eps_list) {
        std::vector<std::complex<double>> z;
        for (double w : linspace(-cfg.omega_max, cfg.omega_max, cfg.z_points)) z.emplace_back(w, eps);
        const double res = verify_relaxation_identity(s, delta, beta, z);
        add(bt + " relaxation identity eps=" + fmt_short(eps), res, 1e-8);
        jeps.push_back(json{{"eps", eps}, {"residual", res}});
      }
      if (!cfg.eps_list.empty()) {
        std::vector<std::complex<double>> z;
        for (double w : linspace(0.0, cfg.omega_max, cfg.z_points)) z.emplace_back(w, cfg.eps_list.front());
        const auto chi = susceptibility(s, beta, z);
        std::ostringstream os;
        os << "omega,re_sigma_z,im_sigma_z,re_chi,im_chi\n" << std::setprecision(17);
        for (std::size_t i = 0; i < z.size(); ++i)
          os << z[i].real() << ',' << chi.sigma_z[i].real() << ',' << chi.sigma_z[i].imag() << ','
             << chi.chi[i].real() << ',' << chi.chi[i].imag() << '\n';
        write_text(dir / ("spectrum_" + std::to_string(ci) + "_beta" + std::to_string(bi) + ".csv"), os.str());
      }
      json jb{{"beta", beta},
              {"m2", th.m2},
              {"sigma_x", th.sigma_x},
              {"hq", th.hq},
              {"delta_eff", th.delta_eff},
              {"mori_yy", th.mori_yy},
              {"sum_rule_residual", sr.residual},
              {"relaxation_identity", jeps},
              {"truncation", json{{"converged", conv.converged}, {"d_m2", conv.d_m2}, {"d_sigma_x", conv.d_sigma_x}}}};

      if (cfg.wlmc_check) {
        RunConfig wc = cfg;
        wc.bath = SpectralKind::discrete;
        wc.modes = bath.modes;
        wc.bath_file.clear();
        wc.beta_list = {beta};
        HarnessOptions wo = opt;
        wo.out_dir = dir / ("wlmc_" + std::to_string(ci) + "_beta" + std::to_string(bi));
        const auto rows = cmd_sweep(wc, wo);
        const auto& e = rows.front().est;
        auto z3 = [](double mc, double err, double exact) { return std::abs(mc - exact) / std::max(err, 1e-300); };
        add(bt + " WLMC M2 vs ED (sigmas)", z3(e.m2.mean, e.m2.std_error, th.m2), 3.0);
        add(bt + " WLMC <sx> vs ED (sigmas)", z3(e.sigma_x.mean, e.sigma_x.std_error, th.sigma_x), 3.0);
        if (e.delta_eff)
          add(bt + " WLMC delta_eff vs ED (sigmas)", z3(e.delta_eff->mean, e.delta_eff->std_error, th.delta_eff), 3.0);
        else
          lines.push_back({bt + " WLMC delta_eff vs ED (sigmas)", 0.0, 3.0, false, e.delta_eff_reason});
        jb["wlmc"] = json{{"m2", estimate_json(e.m2)}, {"sigma_x", estimate_json(e.sigma_x)}};
      }
      ji["betas"].push_back(jb);
    }
    jinst.push_back(ji);
  }

  json jl = json::array();
  for (const auto& l : lines)
    jl.push_back(json{{"name", l.name}, {"value", l.value}, {"threshold", l.threshold}, {"pass", l.pass},
                      {"detail", l.detail}});
  json report{{"command", "ed-check"}, {"config", echo_json(cfg.echo())}, {"overrides", echo_json(opt.overrides)},
              {"instances", jinst}, {"checks", jl}};
  write_text(dir / "ed_check.json", report.dump(2) + "\n");
  return lines;
}

std::vector<RelaxationTrace> cmd_relax(const RunConfig& cfg, const HarnessOptions& opt) {
  const auto dir = output_dir(cfg, opt);
  std::filesystem::create_directories(dir);
  const auto t = linspace(0.0, cfg.t_max, cfg.t_points);
  const auto couplings = cfg.couplings();
  std::vector<RelaxationTrace> out;
  json jt = json::array();
  for (std::size_t i = 0; i < couplings.size(); ++i) {
    const DiscretizedBath bath = ed_bath(cfg, couplings[i]);
    const auto tr = relax_sigma_z(cfg.params.delta, bath, fock_for(cfg, bath), cfg.relax_h, t);
    std::ostringstream os;
    os << std::setprecision(17);
    os << "# coupling=" << couplings[i] << " h=" << tr.h << " linearity_residual=" << tr.linearity_residual
       << (tr.nonlinear ? " NONLINEAR" : "") << '\n';
    os << "t,sigma_z\n";
    for (std::size_t k = 0; k < tr.t.size(); ++k) os << tr.t[k] << ',' << tr.sigma_z[k] << '\n';
    const auto path = dir / ("relax_" + std::to_string(i) + ".csv");
    write_text(path, os.str());
    jt.push_back(json{{"coupling", couplings[i]},
                      {"file", path.filename().string()},
                      {"h", tr.h},
                      {"linearity_residual", tr.linearity_residual},
                      {"nonlinear", tr.nonlinear},
                      {"provenance", bath.provenance}});
    if (tr.nonlinear) log_line(opt, "warning: trace " + path.string() + " is not linear in h; reduce relax_h");
    out.push_back(tr);
  }
  json report{{"command", "relax"}, {"config", echo_json(cfg.echo())}, {"overrides", echo_json(opt.overrides)},
              {"traces", jt}};
  write_text(dir / "relax.json", report.dump(2) + "\n");
  return out;
}

double resistance_estimate(double alpha_cav) {
  if (!(alpha_cav > 0.0)) throw DomainError("resistance_estimate needs alpha_cav > 0");
  return 0.24 / alpha_cav;
}

}  // namespace drabi
