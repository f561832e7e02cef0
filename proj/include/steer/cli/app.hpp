#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace steer::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitInternal = 4;

/// Entry point shared by the `steer` binary and the tests. args[0] is the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace steer::cli
