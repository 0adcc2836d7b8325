#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace inkpipe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;

// Runs one `inkpipe` invocation; args exclude the program name. Records are read
// from `in` and written to `out` when a path is "-".
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace inkpipe::cli
