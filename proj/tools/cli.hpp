#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shbuf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRefused = 3;

// `args` excludes the program name. Normal output goes to `out`, diagnostics
// to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace shbuf::cli
