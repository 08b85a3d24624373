#pragma once
// Command-line surface; see README for the subcommands. Exposed as a
// function so tests can drive it in-process.

#include <string>
#include <vector>

namespace ced {

// args excludes the program name. Exit codes: 0 success, 1 usage,
// 2 validation or diagnostic failure, 3 I/O failure.
int run_cli(std::vector<std::string> args);

}  // namespace ced
