#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "drabi/wlmc.hpp"

namespace drabi {

/// Ordered key/value echo of everything a chain's history depends on
/// (model, bath, schedule, seed). Two checkpoints are compatible iff their
/// echoes are identical.
using Echo = std::vector<std::pair<std::string, std::string>>;

/// Human-readable list of differing keys; empty when the echoes agree.
std::string echo_diff(const Echo& expected, const Echo& found);

/// Versioned text checkpoint: "# drabi checkpoint v1", the echo as
/// "echo key = value" lines, then sweep counters, RNG state, worldline
/// (base sign and kink times at 17 significant digits) and accumulators.
void write_checkpoint(std::ostream& os, const Echo& echo, const ChainState& st);

struct Checkpoint {
  Echo echo;
  ChainState state;
};

Checkpoint read_checkpoint(std::istream& is);

/// Write through a temporary file and rename, so a kill never leaves a torn file.
void save_checkpoint(const std::filesystem::path& path, const Echo& echo, const ChainState& st);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace drabi
