#ifndef SPE_DRIVER_HPP
#define SPE_DRIVER_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "spe/config.hpp"

namespace spe {

// Exit-code contract: 0 success, 1 scientific assertion failure,
// 2 configuration/usage error, 3 numerical blow-up or instability.
enum ExitCode : int {
  kExitOk = 0,
  kExitAssertionFailed = 1,
  kExitConfigError = 2,
  kExitBlowup = 3,
};

bool is_known_subcommand(const std::string& name);
std::string usage_text();

// Runs one subcommand with an already-validated configuration, writing
// artifacts into out_dir (created if missing).  All failures also leave
// a machine-readable error.csv there.
int run_subcommand(const std::string& name, const RunConfig& cfg, const std::string& out_dir,
                   std::ostream& log);

// Full CLI entry: parses argv of the form
//   <subcommand> --config <path> [--seed N] [--out DIR]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spe

#endif
