#pragma once

#include <iosfwd>

namespace lambda4wm {

inline constexpr const char* kVersion = "0.1.0";

/// Entry point of the `lambda4wm` tool. Exit codes: 0 success, 1 invalid input,
/// 2 numerical failure.
int run_cli(int argc, const char* const* argv);

}  // namespace lambda4wm
