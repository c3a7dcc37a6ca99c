#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcbats {

/// Exit codes: 0 success, 1 runtime or replicate failure, 2 configuration or usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dcbats
