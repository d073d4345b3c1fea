#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "drabi/bkt.hpp"
#include "drabi/config.hpp"
#include "drabi/ed.hpp"
#include "drabi/error.hpp"
#include "drabi/wlmc.hpp"

namespace drabi {

/// Raised when a run stops at a checkpoint on request (simulated kill).
class Interrupted : public Error {
 public:
  using Error::Error;
};

struct HarnessOptions {
  std::filesystem::path out_dir;  // empty: use the config's out_dir
  bool resume = false;
  int threads = 1;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  /// Stop every chain once it has reached this sweep (0: never). The chain is
  /// checkpointed there and the command throws Interrupted.
  std::uint64_t stop_after = 0;
  Echo overrides;            // echoed into output metadata
  std::ostream* log = nullptr;
};

/// Output directory after applying the override.
std::filesystem::path output_dir(const RunConfig& cfg, const HarnessOptions& opt);

/// Bath for one swept coupling (g for structured, alpha for pure Ohmic).
SpectralDensity make_density(const RunConfig& cfg, double coupling);
/// Discrete modes from `modes` or `bath_file`.
DiscretizedBath config_bath(const RunConfig& cfg);

struct ResultRow {
  std::string bath;
  double g = 0.0;            // NaN when the bath has no g
  double alpha_eff = 0.0;    // 4 g^2 alpha_cav / omega0^2, or alpha for a pure Ohmic bath
  double alpha_total = 0.0;  // alpha_eff + alpha_q; multiplies M^2 in Psi
  double beta = 0.0;
  double delta = 1.0;
  Estimates est;
  int n_chains = 0;
  double wall_time = 0.0;  // seconds, summed over chains; timing.json only
  double metropolis_acceptance = 0.0;
};

/// Fixed column order, 17 significant digits.
void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& is, const std::string& source = "<csv>");

/// One row per (coupling, beta); chains run on a worker pool and are merged in
/// chain-index order. Writes results.csv, summary.json, checkpoints/ and
/// timing.json (the only output that varies between identical runs).
std::vector<ResultRow> cmd_sweep(const RunConfig& cfg, const HarnessOptions& opt);

/// Builds and certifies a kernel table for every (coupling, beta) point and
/// writes kernel_<i>.txt; returns the file paths.
std::vector<std::filesystem::path> cmd_kernel_table(const RunConfig& cfg, const HarnessOptions& opt);

/// Psi points from result rows: control variable g, or alpha for pure Ohmic rows.
std::vector<PsiPoint> psi_points(const std::vector<ResultRow>& rows);

/// Reads result tables, writes g_curves.csv and bkt_fit.json. Rethrows
/// FitError after writing the curves when the crossing analysis fails.
CriticalFit cmd_bkt_fit(const std::vector<std::filesystem::path>& results, const HarnessOptions& opt,
                        const CriticalOptions& copt = {});

struct CheckLine {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string detail;
};

/// ED invariant suite (completeness, Mori identities, sum rule, relaxation
/// identity over several eps, truncation convergence) and, with wlmc_check,
/// the WLMC comparison on the same discrete bath. Writes ed_check.json and
/// spectrum_<i>_beta<j>.csv.
std::vector<CheckLine> cmd_ed_check(const RunConfig& cfg, const HarnessOptions& opt);

/// Relaxation traces per coupling; writes relax_<i>.csv and relax.json.
std::vector<RelaxationTrace> cmd_relax(const RunConfig& cfg, const HarnessOptions& opt);

/// Circuit resistance in kOhm for a cavity-bath coupling, R = 0.24 / alpha_cav.
double resistance_estimate(double alpha_cav);

}  // namespace drabi
