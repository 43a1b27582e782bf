// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lhnn::cli {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,  // bad flags or inconsistent config
  kIo = 3,     // missing or unwritable file
  kParse = 4,  // malformed or invalid input data
  kDiverged = 5,
};

/// Runs one command; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lhnn::cli
