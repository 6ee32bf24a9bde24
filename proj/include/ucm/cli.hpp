#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ucm {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `ucm` command. `args` excludes the program name. Domain failures
/// print `reason=<CODE>` on `err`.
int execute(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ucm
