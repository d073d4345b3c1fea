#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "drabi/chain_io.hpp"
#include "drabi/kernel_table.hpp"
#include "drabi/spectral.hpp"
#include "drabi/wlmc.hpp"

namespace drabi {

/// Flat "key = value" run description. '#' starts a comment; lists are
/// comma-separated; discrete modes are written "omega:coupling". The first
/// setting must be "version = 1".
struct RunConfig {
  int version = 1;

  SpectralKind bath = SpectralKind::structured;
  ModelParams params{};  // params.beta and params.g are taken from the grids
  bool truncate = true;
  std::vector<BathMode> modes;  // discrete bath
  std::string bath_file;        // discrete bath read from a file instead

  std::vector<double> g_list{0.0};  // structured bath
  std::vector<double> alpha_list;   // pure Ohmic bath
  std::vector<double> beta_list{10.0};

  std::uint64_t n_therm = 10000;
  std::uint64_t n_sweeps = 100000;
  std::uint64_t bin_len = 100;
  int n_chains = 8;
  std::uint64_t seed = 1;
  UpdateScheme updates = UpdateScheme::cluster;
  int metropolis_moves = 0;
  std::uint64_t checkpoint_every = 10000;
  std::size_t autocorr_max_lag = 512;
  int bootstrap = 1000;

  KernelGridSpec kernel{};

  // Exact diagonalization.
  std::vector<int> n_max;
  std::size_t ed_budget = 8192;
  int ed_modes = 0;  // > 0: discretize a continuous bath into this many modes
  std::string ed_scheme = "equal_weight";
  std::vector<double> eps_list{1e-3, 1e-2, 1e-1};
  double omega_max = 5.0;
  int z_points = 201;
  double relax_h = 1e-3;
  double t_max = 20.0;
  int t_points = 401;
  bool wlmc_check = false;

  std::string out_dir = "out";

  /// Swept coupling values: alpha_list for a pure Ohmic bath, g_list for a
  /// structured bath, a single placeholder for a discrete bath.
  std::vector<double> couplings() const;

  /// Throws ParseError naming the offending key when the configuration is
  /// inconsistent (empty grids, missing modes, ...).
  void validate() const;

  /// Every field, serialized; echoed into outputs.
  Echo echo() const;
};

RunConfig parse_config(std::istream& is, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);

}  // namespace drabi
