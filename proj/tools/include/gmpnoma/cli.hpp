#pragma once

#include <iosfwd>

namespace gmpnoma::cli {

enum ExitCode : int {
  kOk = 0,
  kRuntimeError = 1,
  kConfigError = 2,    // bad arguments, bad config, unreadable or unwritable files
  kPartialFailure = 3  // outputs written, but some schedule point has no usable trial
};

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gmpnoma::cli
