#ifndef GELFAND_CLI_HPP
#define GELFAND_CLI_HPP

#include <string>
#include <vector>

namespace gelfand {

/// Entry point shared by the binary and the tests.
/// Exit codes: 0 success, 1 validation failure, 2 configuration/usage error.
int run_cli(const std::vector<std::string>& args);

}  // namespace gelfand

#endif
