#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace riskshare::cli {

// Full command-line entry point: parses argv, dispatches the subcommand, and
// writes results to `out` and machine-readable error documents to `err`.
// Returns the process exit code: 0 success, 1 check-ran-but-some-criterion-
// fails, 2 validation error, 3 numerical error, 4 I/O error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience overload for tests; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace riskshare::cli
