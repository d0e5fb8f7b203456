#pragma once

#include <string>
#include <vector>

#include "finsler/acceptance.hpp"
#include "finsler/config.hpp"

namespace finsler {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertion = 2;
inline constexpr int kExitConfig = 3;

struct CommandOutput {
  int status = kExitOk;
  std::vector<NamedFile> files;    // relative to the output directory
  std::vector<std::string> lines;  // human-readable summary for stdout
  /// Files written to absolute paths outside the output directory.
  std::vector<NamedFile> external;
};

/// Runs the command of a normalized config. `self_path` is the CLI binary,
/// used by the determinism criterion of `acceptance`.
CommandOutput run_command(const Json& cfg, const std::string& self_path = {});

/// {"problem_hash", "value", "converged", "iterations", "seed", "h", "p", "s", ...}
Json solve_result_json(const SolveResult& r, const std::string& problem_hash, std::uint64_t seed,
                       double h, const ExponentPair& ep);

}  // namespace finsler
