#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcdcert {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,          // success, certified, consistent
    kExitNegative = 1,    // not certified, violated
    kExitUsage = 2,       // usage or config error
    kExitEvaluation = 3,  // F could not be evaluated
};

/// Entry point of the mcdcert command line tool. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcdcert
