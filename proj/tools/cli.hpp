#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lanegraph::cli {

/// Runs the command line tool. args excludes the program name. Results go
/// to `out`, diagnostics to `err`. Returns 0 on success, 1 on validation or
/// usage errors and 2 on file I/O errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace lanegraph::cli
