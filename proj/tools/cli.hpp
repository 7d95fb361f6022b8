#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace delconf::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInvalid = 1;  // bad usage, config or input data
inline constexpr int kIoFailure = 2;

// Runs one subcommand. `args` excludes the program name. Machine-readable
// results that are not written to files go to `out`; messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace delconf::cli
