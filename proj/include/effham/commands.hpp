#pragma once

// verify | derive | spectrum | evolve | sweep on a parsed configuration.

#include <string>

#include "effham/config.hpp"
#include "effham/table.hpp"

namespace effham {

struct CommandResult {
  ResultTable table;
  std::string report;  // human-readable summary for standard output
  int exit_code = 0;   // 0 on success, 1 when a checked invariant is violated
};

struct CommandOptions {
  /// Adds a "timestamp" metadata line; off by default so output is byte-stable.
  bool timestamp = false;
};

/// Throws Error for unknown commands and for failures inside the modules.
CommandResult run_command(const RunConfig& config, const std::string& command,
                          const CommandOptions& options = {});

/// Largest ||[S^{ij}, S^{km}] - (delta_jk S^{im} - delta_mi S^{kj})||_F over
/// all index quadruples on the fixed-photon product space.
double un_commutator_residual(int levels, int atoms);

}  // namespace effham
