#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flockkin/harness/config.hpp"
#include "flockkin/harness/report.hpp"

namespace flockkin::harness {

enum ExitCode : int {
  exit_ok = 0,
  exit_verdict_failed = 1,
  exit_input_error = 2,
  exit_runtime_failure = 3,
};

struct CommandOptions {
  std::string config;
  std::string out;  ///< overrides output.dir when non-empty
  std::optional<std::string> metric;  ///< "euclidean" or "sum"
  std::string suite = "all";
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> files;  ///< w1 operands
};

int simulate_command(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int w1_command(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int verify_command(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int check_assumptions_command(const CommandOptions& opt, std::ostream& out, std::ostream& err);

/// Full command line (argv[0] is the program name).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Suite names accepted by verify, in execution order ("all" runs every one).
const std::vector<std::string>& suite_names();

/// Receives (relative path, contents) of every series file a suite produces.
using FileSink = std::function<void(const std::string&, const std::string&)>;

/// Runs one verification suite on a loaded config and returns its verdicts.
/// Studies that need a trajectory receive `traj` (the main run of `cfg`).
std::vector<ReportEntry> run_suite(const std::string& suite, const RunConfig& cfg, const Trajectory& traj,
                                   const FileSink& sink = {});

}  // namespace flockkin::harness
