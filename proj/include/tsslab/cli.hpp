#pragma once

#include <iosfwd>

namespace tsslab {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitValidation = 2,   // usage errors and unusable requests
    kExitConfigParse = 3,
    kExitParameter = 4,
    kExitMethodFailure = 5,
};

/// Entry point of the `tsslab` tool. Results go to `out`; failures print
/// one JSON object {"error", "message", "exit_code"} to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace tsslab
