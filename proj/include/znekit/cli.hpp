#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace znekit::cli {

/// Entry point behind the znekit binary: subcommands run, bench-rb,
/// bench-h2, fit. Returns the process exit code: 0 success, 2 input error,
/// 3 numerical/fit error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace znekit::cli
