#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace latentscale {

enum exit_code : int { exit_ok = 0, exit_runtime = 1, exit_usage = 2 };

// Runs one command line (argv[0] excluded). Reports go to `out`, diagnostics
// and usage to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latentscale
