#pragma once

#include <iosfwd>

namespace chronoseries::cli {

/// Runs one command. Results go to `out` (when no --out file is given),
/// "error: <code>: <message>" lines to `err`; log lines go to the library logger.
/// Returns the process exit status.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace chronoseries::cli
