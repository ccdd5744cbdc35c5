#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace signmotion {

// Entry point of the command-line tool.  Returns the process exit status:
// 0 on success, 2 for input or validation errors, 3 for runtime errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace signmotion
