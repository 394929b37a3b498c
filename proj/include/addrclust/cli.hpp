#pragma once

#include <ostream>
#include <string_view>

namespace addrclust {

inline constexpr std::string_view kVersion = "0.1.0";

/// Exit codes: 0 success, 1 input or validation error, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace addrclust
