#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pgamarket::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kNotViable = 2,
  kVerifyFailed = 3,
};

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pgamarket::cli
