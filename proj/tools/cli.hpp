#pragma once

#include <ostream>

namespace kacbath::cli {

/// Runs one subcommand. The JSON report goes to `out`; on failure a one-line
/// JSON error record goes to `err`. Returns 0 ok, 2 config, 3 numerical or
/// failed check, 4 I/O.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kacbath::cli
