#pragma once

#include <iosfwd>

namespace soc {

/// Entry point of the `soc` command-line tool. Returns the process exit code;
/// failures print one line "error: <Class>: <message>" to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace soc
