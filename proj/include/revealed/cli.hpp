#pragma once

#include <string>
#include <vector>

namespace revealed {

// Parses and runs one command-line invocation (argv[0] excluded). Writes
// artifacts under --out and reports problems on stderr. Returns the process
// exit status: 0 success, 1 usage error, 2 data or contract error,
// 3 numerical failure.
int run_cli(const std::vector<std::string>& args);

int run_cli(int argc, const char* const* argv);

}  // namespace revealed
