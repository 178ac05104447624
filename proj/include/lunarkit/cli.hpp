#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lunarkit::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kFormat = 2,
  kIo = 3,
  kVerification = 4,
};

// Runs one command line (without the program name). Data goes to `out`,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lunarkit::cli
