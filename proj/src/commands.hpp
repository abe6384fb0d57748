#pragma once

#include <string>

namespace zipfrac {

struct CommandResult {
  // 0 ok, 1 check failed, 2 config error, 3 budget, 4 empty intersection,
  // 5 unsupported input.
  int exit_code = 0;
  std::string summary_json;
};

// Executes one subcommand (build | interp | bernstein | convergence | shape |
// dim | verify) against a JSON config document, writing output files under
// out_dir. Does not throw; failures are reported through the exit code and
// the summary document.
CommandResult run_command(const std::string& subcommand,
                          const std::string& config_json,
                          const std::string& out_dir);

}  // namespace zipfrac
