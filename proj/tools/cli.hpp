#pragma once

#include <string>
#include <vector>

namespace seal::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;       // bad arguments, unreadable or malformed files
inline constexpr int kExitInfeasible = 3;  // no alignment exists within the search windows
inline constexpr int kExitInternal = 4;    // an internal consistency check failed

int run_cli(int argc, const char* const* argv);

// args excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace seal::cli
