#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dhde::cli {

// Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure. Failures
// write one JSON error record to `err`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumerical = 3;

// Name of the environment variable that supplies --config when the flag is
// absent.
inline constexpr const char* kConfigEnv = "DHDE_CONFIG";

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dhde::cli
