#pragma once

#include <iosfwd>

namespace kanto::cli {

/// Runs the `kanto` command line. Returns the process exit status:
/// 0 success, 1 validation, 2 I/O, 3 internal.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kanto::cli
