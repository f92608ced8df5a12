#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ember::cli {

inline constexpr const char* kToolVersion = "0.3.0";

/// Runs one `ember` invocation. `args` excludes the program name. Returns
/// 0 on success, 1 on validation or fit errors, 2 on usage errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ember::cli
