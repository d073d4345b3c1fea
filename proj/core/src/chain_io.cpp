#include "drabi/chain_io.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "drabi/error.hpp"

namespace drabi {
namespace {

constexpr const char* kMagic = "# drabi checkpoint v1";

template <class T>
T read_value(std::istream& is, const char* what) {
  T v{};
  if (!(is >> v)) throw ParseError(std::string("checkpoint: cannot read ") + what);
  return v;
}

void expect_tag(std::istream& is, const std::string& tag) {
  std::string t;
  if (!(is >> t) || t != tag) throw ParseError("checkpoint: expected '" + tag + "', found '" + t + "'");
}

void write_vec(std::ostream& os, const char* tag, const std::vector<double>& v) {
  os << tag << ' ' << v.size();
  for (double x : v) os << ' ' << x;
  os << '\n';
}

std::vector<double> read_vec(std::istream& is, const char* tag) {
  expect_tag(is, tag);
  const auto n = read_value<std::size_t>(is, tag);
  std::vector<double> v(n);
  for (auto& x : v) x = read_value<double>(is, tag);
  return v;
}

}  // namespace

std::string echo_diff(const Echo& expected, const Echo& found) {
  std::map<std::string, std::string> a(expected.begin(), expected.end());
  std::map<std::string, std::string> b(found.begin(), found.end());
  std::ostringstream os;
  for (const auto& [k, v] : a) {
    const auto it = b.find(k);
    if (it == b.end()) os << "  " << k << ": expected '" << v << "', missing in checkpoint\n";
    else if (it->second != v) os << "  " << k << ": expected '" << v << "', checkpoint has '" << it->second << "'\n";
  }
  for (const auto& [k, v] : b)
    if (!a.count(k)) os << "  " << k << ": unexpected in checkpoint ('" << v << "')\n";
  return os.str();
}

void write_checkpoint(std::ostream& os, const Echo& echo, const ChainState& st) {
  os << kMagic << '\n';
  for (const auto& [k, v] : echo) os << "echo " << k << " = " << v << '\n';
  os << std::setprecision(17);
  os << "sweep " << st.sweep << '\n';
  os << "metropolis " << st.proposed << ' ' << st.accepted << '\n';
  os << "rng " << st.rng.serialize() << '\n';
  const Worldline& wl = st.worldline;
  os << "worldline " << wl.beta << ' ' << wl.base_sign << ' ' << wl.kinks.size();
  for (double t : wl.kinks) os << ' ' << t;
  os << '\n';
  const ChainAccumulators& a = st.acc;
  os << "bin " << a.in_bin << ' ' << a.bin_m << ' ' << a.bin_m2 << ' ' << a.bin_sx << '\n';
  write_vec(os, "bins_m", a.bins_m);
  write_vec(os, "bins_m2", a.bins_m2);
  write_vec(os, "bins_sx", a.bins_sx);
  os << "autocorr_m2\n";
  a.ac_m2.write(os);
  os << "autocorr_sx\n";
  a.ac_sx.write(os);
  os << "end\n";
}

Checkpoint read_checkpoint(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMagic)
    throw ParseError("checkpoint: missing or unsupported version header");
  Checkpoint cp;
  while (is.peek() == 'e') {
    std::getline(is, line);
    if (line.rfind("echo ", 0) != 0) throw ParseError("checkpoint: malformed line '" + line + "'");
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw ParseError("checkpoint: malformed echo '" + line + "'");
    cp.echo.emplace_back(line.substr(5, eq - 5), line.substr(eq + 3));
  }
  ChainState& st = cp.state;
  expect_tag(is, "sweep");
  st.sweep = read_value<std::uint64_t>(is, "sweep");
  expect_tag(is, "metropolis");
  st.proposed = read_value<std::uint64_t>(is, "proposed");
  st.accepted = read_value<std::uint64_t>(is, "accepted");
  expect_tag(is, "rng");
  is >> std::ws;
  std::getline(is, line);
  st.rng = Rng::deserialize(line);
  expect_tag(is, "worldline");
  st.worldline.beta = read_value<double>(is, "beta");
  st.worldline.base_sign = read_value<int>(is, "base sign");
  const auto nk = read_value<std::size_t>(is, "kink count");
  st.worldline.kinks.resize(nk);
  for (auto& t : st.worldline.kinks) t = read_value<double>(is, "kink");
  if (!st.worldline.valid()) throw ParseError("checkpoint: invalid worldline");
  expect_tag(is, "bin");
  ChainAccumulators& a = st.acc;
  a.in_bin = read_value<std::uint64_t>(is, "bin fill");
  a.bin_m = read_value<double>(is, "bin m");
  a.bin_m2 = read_value<double>(is, "bin m2");
  a.bin_sx = read_value<double>(is, "bin sx");
  a.bins_m = read_vec(is, "bins_m");
  a.bins_m2 = read_vec(is, "bins_m2");
  a.bins_sx = read_vec(is, "bins_sx");
  expect_tag(is, "autocorr_m2");
  a.ac_m2 = AutocorrAccumulator::read(is);
  expect_tag(is, "autocorr_sx");
  a.ac_sx = AutocorrAccumulator::read(is);
  expect_tag(is, "end");
  return cp;
}

void save_checkpoint(const std::filesystem::path& path, const Echo& echo, const ChainState& st) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw Error("cannot write checkpoint " + tmp.string());
    write_checkpoint(os, echo, st);
    if (!os) throw Error("write failed for checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open checkpoint " + path.string());
  return read_checkpoint(is);
}

}  // namespace drabi
