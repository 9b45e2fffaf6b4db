#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace defidx::cli {

/// Exit statuses shared by every subcommand.
enum ExitCode : int { kOk = 0, kFailed = 1, kInvalid = 2, kIndeterminate = 3 };

/// Runs one command line (without the program name). The report goes to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Removes the volatile "timing" member from a JSON run report.
std::string strip_timing(const std::string& report);

}  // namespace defidx::cli
