#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace levymax::cli {

inline constexpr int kExitHolds = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolated = 2;

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "LEVYMAX_OUTPUT_ROOT";

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> jobs;
};

/// `run <config>`: returns the process exit code.
int run_command(const std::string& config_path, const RunOptions& options, std::ostream& out, std::ostream& err);

/// `sweep <config> --grid key=v1,v2,...` (several grids form a Cartesian product).
/// Sweepable keys: p, scale, lambda, radius, n_steps, dt.
int sweep_command(const std::string& config_path, const std::vector<std::string>& grids, const RunOptions& options,
                  std::ostream& out, std::ostream& err);

int describe_command(const std::string& kind, std::ostream& out, std::ostream& err);

}  // namespace levymax::cli
