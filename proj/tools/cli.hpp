#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vcrown::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kValidation = 3,
    kSaturation = 4,
    kInvariant = 5,
    kIo = 6,
};

/// Runs one command line. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace vcrown::cli
