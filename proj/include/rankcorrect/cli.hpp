#pragma once

// The `rankcorrect` command-line surface: prep, train, eval, simulate and
// sweep. run() is the whole program minus main(), so tests can drive
// subcommands in-process and assert on exit codes and outputs.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <string>
#include <vector>

namespace rankcorrect::cli {

// args excludes the program name (i.e. argv[1..]).
int run(std::vector<std::string> args);

int run(int argc, char** argv);

}  // namespace rankcorrect::cli
