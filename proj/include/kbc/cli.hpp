#pragma once

#include <string>
#include <vector>

namespace kbc {

// Runs one subcommand; args[0] names it. Returns the process exit code
// (0 ok, 1 usage, 2 data error, 3 numerical failure).
int dispatch_command(std::vector<std::string> args);

int run_cli(int argc, char** argv);

}  // namespace kbc
