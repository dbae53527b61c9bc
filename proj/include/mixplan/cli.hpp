#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mixplan::cli {

// args excludes the program name. Exit codes: 0 ok, 2 bad input (including
// resource caps), 3 infeasible, 1 anything else.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mixplan::cli
