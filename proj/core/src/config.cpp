#include "drabi/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <sstream>

#include "drabi/error.hpp"

namespace drabi {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

struct Where {
  std::string source;
  int line;
  std::string key;
  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError(source + ":" + std::to_string(line) + ": key '" + key + "': " + why);
  }
};

double to_double(const std::string& v, const Where& w) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
    w.fail("expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& v, const Where& w) {
  std::uint64_t x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) w.fail("expected a non-negative integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& v, const Where& w) {
  int x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) w.fail("expected an integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const Where& w) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  w.fail("expected true or false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& v, const Where& w) {
  std::vector<double> out;
  if (v.empty()) return out;
  for (const auto& p : split(v, ',')) out.push_back(to_double(p, w));
  return out;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

using Setter = std::function<void(RunConfig&, const std::string&, const Where&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"bath", [](RunConfig& c, const std::string& v, const Where& w) {
         if (v == "structured") c.bath = SpectralKind::structured;
         else if (v == "pure_ohmic") c.bath = SpectralKind::pure_ohmic;
         else if (v == "discrete") c.bath = SpectralKind::discrete;
         else w.fail("expected structured, pure_ohmic or discrete");
       }},
      {"delta", [](RunConfig& c, const std::string& v, const Where& w) { c.params.delta = to_double(v, w); }},
      {"omega0", [](RunConfig& c, const std::string& v, const Where& w) { c.params.omega0 = to_double(v, w); }},
      {"alpha_cav", [](RunConfig& c, const std::string& v, const Where& w) { c.params.alpha_cav = to_double(v, w); }},
      {"alpha_q", [](RunConfig& c, const std::string& v, const Where& w) { c.params.alpha_q = to_double(v, w); }},
      {"omega_c", [](RunConfig& c, const std::string& v, const Where& w) { c.params.omega_c = to_double(v, w); }},
      {"truncate", [](RunConfig& c, const std::string& v, const Where& w) { c.truncate = to_bool(v, w); }},
      {"modes", [](RunConfig& c, const std::string& v, const Where& w) {
         c.modes.clear();
         for (const auto& p : split(v, ',')) {
           const auto colon = p.find(':');
           if (colon == std::string::npos) w.fail("modes are written omega:coupling");
           c.modes.push_back({to_double(trim(p.substr(0, colon)), w), to_double(trim(p.substr(colon + 1)), w)});
         }
       }},
      {"bath_file", [](RunConfig& c, const std::string& v, const Where&) { c.bath_file = v; }},
      {"g_list", [](RunConfig& c, const std::string& v, const Where& w) { c.g_list = to_doubles(v, w); }},
      {"alpha_list", [](RunConfig& c, const std::string& v, const Where& w) { c.alpha_list = to_doubles(v, w); }},
      {"beta_list", [](RunConfig& c, const std::string& v, const Where& w) { c.beta_list = to_doubles(v, w); }},
      {"n_therm", [](RunConfig& c, const std::string& v, const Where& w) { c.n_therm = to_u64(v, w); }},
      {"n_sweeps", [](RunConfig& c, const std::string& v, const Where& w) { c.n_sweeps = to_u64(v, w); }},
      {"bin_len", [](RunConfig& c, const std::string& v, const Where& w) { c.bin_len = to_u64(v, w); }},
      {"n_chains", [](RunConfig& c, const std::string& v, const Where& w) { c.n_chains = to_int(v, w); }},
      {"seed", [](RunConfig& c, const std::string& v, const Where& w) { c.seed = to_u64(v, w); }},
      {"updates", [](RunConfig& c, const std::string& v, const Where& w) {
         try {
           c.updates = parse_update_scheme(v);
         } catch (const ParseError& e) {
           w.fail(e.what());
         }
       }},
      {"metropolis_moves", [](RunConfig& c, const std::string& v, const Where& w) { c.metropolis_moves = to_int(v, w); }},
      {"checkpoint_every", [](RunConfig& c, const std::string& v, const Where& w) { c.checkpoint_every = to_u64(v, w); }},
      {"autocorr_max_lag", [](RunConfig& c, const std::string& v, const Where& w) { c.autocorr_max_lag = to_u64(v, w); }},
      {"bootstrap", [](RunConfig& c, const std::string& v, const Where& w) { c.bootstrap = to_int(v, w); }},
      {"kernel_tau_min", [](RunConfig& c, const std::string& v, const Where& w) { c.kernel.tau_min = to_double(v, w); }},
      {"kernel_points_per_octave", [](RunConfig& c, const std::string& v, const Where& w) { c.kernel.points_per_octave = to_int(v, w); }},
      {"kernel_quad_tol", [](RunConfig& c, const std::string& v, const Where& w) { c.kernel.quad_rel_tol = to_double(v, w); }},
      {"kernel_tol", [](RunConfig& c, const std::string& v, const Where& w) { c.kernel.target_tol = to_double(v, w); }},
      {"n_max", [](RunConfig& c, const std::string& v, const Where& w) {
         c.n_max.clear();
         for (const auto& p : split(v, ',')) c.n_max.push_back(to_int(p, w));
       }},
      {"ed_budget", [](RunConfig& c, const std::string& v, const Where& w) { c.ed_budget = to_u64(v, w); }},
      {"ed_modes", [](RunConfig& c, const std::string& v, const Where& w) { c.ed_modes = to_int(v, w); }},
      {"ed_scheme", [](RunConfig& c, const std::string& v, const Where& w) {
         if (v != "equal_weight" && v != "linear") w.fail("expected equal_weight or linear");
         c.ed_scheme = v;
       }},
      {"eps_list", [](RunConfig& c, const std::string& v, const Where& w) { c.eps_list = to_doubles(v, w); }},
      {"omega_max", [](RunConfig& c, const std::string& v, const Where& w) { c.omega_max = to_double(v, w); }},
      {"z_points", [](RunConfig& c, const std::string& v, const Where& w) { c.z_points = to_int(v, w); }},
      {"relax_h", [](RunConfig& c, const std::string& v, const Where& w) { c.relax_h = to_double(v, w); }},
      {"t_max", [](RunConfig& c, const std::string& v, const Where& w) { c.t_max = to_double(v, w); }},
      {"t_points", [](RunConfig& c, const std::string& v, const Where& w) { c.t_points = to_int(v, w); }},
      {"wlmc_check", [](RunConfig& c, const std::string& v, const Where& w) { c.wlmc_check = to_bool(v, w); }},
      {"out_dir", [](RunConfig& c, const std::string& v, const Where&) { c.out_dir = v; }},
  };
  return table;
}

}  // namespace

std::vector<double> RunConfig::couplings() const {
  switch (bath) {
    case SpectralKind::pure_ohmic: return alpha_list;
    case SpectralKind::structured: return g_list;
    case SpectralKind::discrete: return {std::nan("")};
  }
  return {};
}

void RunConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ParseError("config: key '" + key + "': " + why);
  };
  if (beta_list.empty()) fail("beta_list", "must not be empty");
  for (double b : beta_list)
    if (!(b > 0.0)) fail("beta_list", "every beta must be positive");
  if (bath == SpectralKind::pure_ohmic && alpha_list.empty()) fail("alpha_list", "required for a pure_ohmic bath");
  if (bath == SpectralKind::structured && g_list.empty()) fail("g_list", "must not be empty");
  if (bath == SpectralKind::discrete && modes.empty() && bath_file.empty())
    fail("modes", "a discrete bath needs modes or bath_file");
  if (!(params.delta >= 0.0)) fail("delta", "must be >= 0");
  if (!(params.omega_c > 0.0)) fail("omega_c", "must be positive");
  if (bath == SpectralKind::structured && !(params.omega0 > 0.0 && params.omega_c > params.omega0))
    fail("omega0", "need 0 < omega0 < omega_c");
  if (params.alpha_cav < 0.0) fail("alpha_cav", "must be >= 0");
  if (params.alpha_q < 0.0) fail("alpha_q", "must be >= 0");
  if (n_sweeps == 0) fail("n_sweeps", "must be positive");
  if (bin_len == 0) fail("bin_len", "must be positive");
  if (n_chains < 1) fail("n_chains", "must be >= 1");
  if (bootstrap < 0) fail("bootstrap", "must be >= 0");
  if (z_points < 2) fail("z_points", "must be >= 2");
  if (t_points < 2) fail("t_points", "must be >= 2");
}

Echo RunConfig::echo() const {
  Echo e;
  e.emplace_back("version", std::to_string(version));
  e.emplace_back("bath", to_string(bath));
  e.emplace_back("delta", fmt(params.delta));
  e.emplace_back("omega0", fmt(params.omega0));
  e.emplace_back("alpha_cav", fmt(params.alpha_cav));
  e.emplace_back("alpha_q", fmt(params.alpha_q));
  e.emplace_back("omega_c", fmt(params.omega_c));
  e.emplace_back("truncate", truncate ? "true" : "false");
  {
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < modes.size(); ++i) os << (i ? ", " : "") << modes[i].omega << ':' << modes[i].coupling;
    e.emplace_back("modes", os.str());
  }
  e.emplace_back("bath_file", bath_file);
  e.emplace_back("g_list", join(g_list));
  e.emplace_back("alpha_list", join(alpha_list));
  e.emplace_back("beta_list", join(beta_list));
  e.emplace_back("n_therm", std::to_string(n_therm));
  e.emplace_back("n_sweeps", std::to_string(n_sweeps));
  e.emplace_back("bin_len", std::to_string(bin_len));
  e.emplace_back("n_chains", std::to_string(n_chains));
  e.emplace_back("seed", std::to_string(seed));
  e.emplace_back("updates", to_string(updates));
  e.emplace_back("metropolis_moves", std::to_string(metropolis_moves));
  e.emplace_back("checkpoint_every", std::to_string(checkpoint_every));
  e.emplace_back("autocorr_max_lag", std::to_string(autocorr_max_lag));
  e.emplace_back("bootstrap", std::to_string(bootstrap));
  e.emplace_back("kernel_tau_min", fmt(kernel.tau_min));
  e.emplace_back("kernel_points_per_octave", std::to_string(kernel.points_per_octave));
  e.emplace_back("kernel_quad_tol", fmt(kernel.quad_rel_tol));
  e.emplace_back("kernel_tol", fmt(kernel.target_tol));
  e.emplace_back("n_max", join(n_max));
  e.emplace_back("ed_budget", std::to_string(ed_budget));
  e.emplace_back("ed_modes", std::to_string(ed_modes));
  e.emplace_back("ed_scheme", ed_scheme);
  e.emplace_back("eps_list", join(eps_list));
  e.emplace_back("omega_max", fmt(omega_max));
  e.emplace_back("z_points", std::to_string(z_points));
  e.emplace_back("relax_h", fmt(relax_h));
  e.emplace_back("t_max", fmt(t_max));
  e.emplace_back("t_points", std::to_string(t_points));
  e.emplace_back("wlmc_check", wlmc_check ? "true" : "false");
  e.emplace_back("out_dir", out_dir);
  return e;
}

RunConfig parse_config(std::istream& is, const std::string& source) {
  RunConfig c;
  std::string raw;
  int line = 0;
  bool have_version = false;
  std::map<std::string, int> seen;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ParseError(source + ":" + std::to_string(line) + ": expected 'key = value', got '" + text + "'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const Where w{source, line, key};
    if (key.empty()) w.fail("empty key");
    if (seen.count(key)) w.fail("duplicate key (first set on line " + std::to_string(seen[key]) + ")");
    seen[key] = line;
    if (key == "version") {
      if (have_version) w.fail("duplicate version");
      if (to_int(value, w) != 1) w.fail("unsupported version '" + value + "' (expected 1)");
      have_version = true;
      continue;
    }
    if (!have_version) w.fail("the first setting must be 'version = 1'");
    const auto it = setters().find(key);
    if (it == setters().end()) w.fail("unknown key");
    it->second(c, value, w);
  }
  if (!have_version) throw ParseError(source + ": missing 'version = 1'");
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open config file '" + path + "'");
  return parse_config(is, path);
}

}  // namespace drabi
