#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace entroflow::cli {

enum ExitCode { pass = 0, check_failed = 1, config_error = 2 };

/// Runs the command line (args excludes the program name). Human-readable
/// lines go to `out`, diagnostics and usage to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes `text` to `path` through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace entroflow::cli
