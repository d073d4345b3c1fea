#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "drabi/kernel_table.hpp"
#include "drabi/rng.hpp"
#include "drabi/stats.hpp"
#include "drabi/worldline.hpp"

namespace drabi {

// Continuous-time worldline Monte Carlo for a spin coupled through sigma_z to
// a Gaussian bath. A configuration with n kinks has weight
//
//   (delta / 2)^n exp( 1/2 int int sigma(t) K(t - t') sigma(t') dt dt' ),
//
// i.e. a classical Ising chain on the circle [0, beta) with long-range
// ferromagnetic couplings K.

enum class UpdateScheme { cluster, metropolis, mixed };

std::string to_string(UpdateScheme s);
UpdateScheme parse_update_scheme(const std::string& s);

struct Schedule {
  std::uint64_t n_therm = 10000;
  std::uint64_t n_sweeps = 100000;
  std::uint64_t bin_len = 100;
  std::uint64_t seed = 1;
  std::uint64_t chain = 0;
  UpdateScheme updates = UpdateScheme::cluster;
  int metropolis_moves = 0;  // per sweep; 0 picks max(10, ceil(beta delta))
  std::uint64_t checkpoint_every = 0;  // sweeps; 0 disables
  std::size_t autocorr_max_lag = 512;
};

struct ObservableSample {
  double m = 0.0;
  double m2 = 0.0;
  std::size_t n_kinks = 0;
  double sigma_x_est = 0.0;
  double hq_est = 0.0;
};

ObservableSample measure(const Worldline& wl, double delta);

/// Running per-chain measurement state.
struct ChainAccumulators {
  std::uint64_t in_bin = 0;
  double bin_m = 0.0;
  double bin_m2 = 0.0;
  double bin_sx = 0.0;
  std::vector<double> bins_m;
  std::vector<double> bins_m2;
  std::vector<double> bins_sx;
  AutocorrAccumulator ac_m2;
  AutocorrAccumulator ac_sx;

  explicit ChainAccumulators(std::size_t max_lag = 512) : ac_m2(max_lag), ac_sx(max_lag) {}
  void add(const ObservableSample& s, std::uint64_t bin_len);
};

/// Everything that determines the future of one Markov chain.
struct ChainState {
  Worldline worldline;
  Rng rng;
  std::uint64_t sweep = 0;
  std::uint64_t proposed = 0;  // Metropolis bookkeeping
  std::uint64_t accepted = 0;
  ChainAccumulators acc;
};

ChainState make_chain(double beta, const Schedule& sched);

/// One Swendsen-Wang sweep: Poisson cuts of rate delta/2, segment bonds with
/// probability 1 - exp(-2 J_ij) between equal-sign segments, independent
/// cluster flips. Throws DomainError if the table does not match beta.
void cluster_sweep(ChainState& st, const KernelTable& kt, double delta);

/// One kink-pair insertion or removal attempt; returns whether it was accepted.
bool metropolis_kink_pair(ChainState& st, const KernelTable& kt, double delta);

/// Sum over the segments outside the arc [start, start + length) (mod beta)
/// of sign_j * int_arc int_j K. The arc must not contain kinks in its interior.
double arc_field(const Worldline& wl, const KernelTable& kt, double start, double length);

/// Log of the configuration weight relative to the kink fugacity, i.e.
/// 1/2 int int sigma K sigma. Quadratic in the kink count; used by tests.
double log_weight(const Worldline& wl, const KernelTable& kt);

int metropolis_moves_per_sweep(const Schedule& sched, double beta, double delta);

/// Advance the chain until st.sweep == until, measuring after n_therm sweeps.
/// on_checkpoint is invoked every sched.checkpoint_every sweeps.
void advance(ChainState& st, const KernelTable& kt, double delta, const Schedule& sched,
             std::uint64_t until, const std::function<void(const ChainState&)>& on_checkpoint = {});

struct Estimates {
  MCEstimate m;
  MCEstimate m2;
  MCEstimate sigma_x;
  MCEstimate hq;
  std::optional<MCEstimate> delta_eff;
  std::string delta_eff_reason;  // set when delta_eff is undefined
};

/// Merge finished chains (in the given order) into observable estimates.
Estimates estimate(const std::vector<const ChainState*>& chains, double delta, double beta,
                   const Schedule& sched, int bootstrap_resamples = 1000);

/// Run one chain from scratch and return its estimates.
Estimates run_chain(double delta, const KernelTable& kt, const Schedule& sched,
                    int bootstrap_resamples = 1000);

}  // namespace drabi
