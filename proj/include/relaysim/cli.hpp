// cli.hpp - command-line orchestration: evaluate one configuration, run a
// constrained optimization, or sweep an axis. Exposed as a library call so
// tests can drive the commands end to end.

#pragma once

#include <string>
#include <vector>

namespace relaysim {

// exit codes: 0 success, 1 input error, 2 infeasible / no feasible solution
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace relaysim
