#pragma once

#include <iosfwd>

namespace owc::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kIoError = 3,
    kMissingPredictions = 4,
};

/// Entry point of `owcsim`: gen | track | sweep | render | surface.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace owc::cli
