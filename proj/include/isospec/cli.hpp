// cli.hpp - the isospec command-line front end
//
// Commands: build, verify, coherent, fixture list|build, quantize.
// Exit codes: 0 all checks pass, 1 input error, 2 regime/domain error,
// 3 verification failure.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace isospec::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitInput = 1,
    kExitDomain = 2,
    kExitVerify = 3,
};

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main_entry(int argc, char** argv);

}  // namespace isospec::cli
