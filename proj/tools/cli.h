#ifndef SLTERR_TOOLS_CLI_H_
#define SLTERR_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace slterr::cli {

// Runs one subcommand; args excludes the program name. Returns the exit code.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int Main(int argc, char** argv);

}  // namespace slterr::cli

#endif  // SLTERR_TOOLS_CLI_H_
