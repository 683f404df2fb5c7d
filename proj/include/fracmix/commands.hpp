#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>

#include "fracmix/config.hpp"

namespace fracmix {

enum ExitCode : int { exit_ok = 0, exit_numerical = 1, exit_config = 2 };

struct CliOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

// Each command writes its artifacts into the output directory and returns
// an exit code; errors are reported on `log`.
int cmd_solve(const RunConfig& config, const CliOverrides& cli, std::ostream& log);
int cmd_bracket(const RunConfig& config, const CliOverrides& cli, std::ostream& log);
int cmd_second(const RunConfig& config, const CliOverrides& cli, std::ostream& log);
int cmd_verify(const RunConfig& config, const CliOverrides& cli, std::ostream& log);
int cmd_export(const RunConfig& config, const CliOverrides& cli, std::ostream& log);

// Worker count: FRACMIX_THREADS if set, else the hardware concurrency.
int thread_cap();
// Runs fn(0..count-1) on up to thread_cap() threads.
void parallel_for(int count, const std::function<void(int)>& fn);

}  // namespace fracmix
